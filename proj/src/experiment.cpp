// Copyright 2026 The rpda Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rpda/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include "json.hpp"
#include <ostream>
#include <set>
#include <sstream>

#include "rpda/errors.hpp"
#include "rpda/parallel.hpp"
#include "rpda/protocol_sim.hpp"
#include "rpda/trace.hpp"

namespace rpda {
namespace {

using nlohmann::json;

// ---- parsing -------------------------------------------------------------

class Reader {
 public:
  explicit Reader(std::vector<Diagnostic>& diags) : diags_(diags) {}

  void keys(const json& obj, const std::string& path, std::set<std::string> allowed) {
    for (const auto& [k, v] : obj.items()) {
      if (!allowed.count(k)) fail(join(path, k), "unknown key");
    }
  }

  bool object(const json& parent, const std::string& path, const char* key, const json*& out) {
    out = nullptr;
    if (!parent.contains(key)) return false;
    const json& v = parent.at(key);
    if (!v.is_object()) {
      fail(join(path, key), "expected an object");
      return false;
    }
    out = &v;
    return true;
  }

  template <class T>
  bool number(const json& obj, const std::string& path, const char* key, T& out) {
    if (!obj.contains(key)) return false;
    const json& v = obj.at(key);
    const std::string field = join(path, key);
    if (!v.is_number()) {
      fail(field, "expected a number");
      return false;
    }
    if constexpr (std::is_integral_v<T>) {
      const double d = v.get<double>();
      if (v.is_number_float() && d != std::floor(d)) {
        fail(field, "expected an integer");
        return false;
      }
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_unsigned()) {
          out = v.get<T>();
          return true;
        }
        if (d < 0) {
          fail(field, "expected a non-negative integer");
          return false;
        }
      }
      if (std::abs(d) > 2e9 && !std::is_same_v<T, std::uint64_t>) {
        fail(field, "integer out of range");
        return false;
      }
      out = v.is_number_float() ? static_cast<T>(d) : v.get<T>();
    } else {
      out = v.get<T>();
    }
    return true;
  }

  bool string(const json& obj, const std::string& path, const char* key, std::string& out) {
    if (!obj.contains(key)) return false;
    const json& v = obj.at(key);
    if (!v.is_string()) {
      fail(join(path, key), "expected a string");
      return false;
    }
    out = v.get<std::string>();
    return true;
  }

  bool boolean(const json& obj, const std::string& path, const char* key, bool& out) {
    if (!obj.contains(key)) return false;
    const json& v = obj.at(key);
    if (!v.is_boolean()) {
      fail(join(path, key), "expected true or false");
      return false;
    }
    out = v.get<bool>();
    return true;
  }

  void fail(std::string field, std::string msg) { diags_.push_back({std::move(field), std::move(msg)}); }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

 private:
  std::vector<Diagnostic>& diags_;
};

void parse_model(Reader& rd, const json& obj, LargeScaleModel& model) {
  std::string type = "model1";
  rd.string(obj, "model", "type", type);
  double delta_bar = 10.0;
  rd.number(obj, "model", "delta_bar", delta_bar);
  if (type == "model1") {
    rd.keys(obj, "model", {"type", "delta_bar", "alpha"});
    UniformPowerError m{delta_bar, 0.0};
    rd.number(obj, "model", "alpha", m.alpha);
    model = m;
  } else if (type == "model2") {
    rd.keys(obj, "model", {"type", "delta_bar", "sigma_v2"});
    LogNormalShadowing m{delta_bar, 0.0};
    rd.number(obj, "model", "sigma_v2", m.sigma_v2);
    model = m;
  } else if (type == "model3") {
    rd.keys(obj, "model", {"type", "delta_bar", "alpha", "d0", "pathloss_exp"});
    UniformDistance m;
    m.delta_bar = delta_bar;
    rd.number(obj, "model", "alpha", m.alpha);
    rd.number(obj, "model", "d0", m.d0);
    rd.number(obj, "model", "pathloss_exp", m.pathloss_exp);
    model = m;
  } else {
    rd.fail("model.type", "expected model1, model2 or model3");
  }
}

std::pair<int, int> line_column(std::string_view text, std::size_t byte) {
  const std::size_t end = std::min(text.size(), byte == 0 ? 0 : byte - 1);
  int line = 1;
  std::size_t line_start = 0;
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      line_start = i + 1;
    }
  }
  return {line, static_cast<int>(end - line_start) + 1};
}

// ---- output --------------------------------------------------------------

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : cols_(header.size()) { row(header); }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != cols_) throw std::logic_error("csv row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text_ += ',';
      text_ += cells[i];
    }
    text_ += '\n';
  }

  const std::string& text() const { return text_; }

 private:
  std::size_t cols_;
  std::string text_;
};

struct Output {
  std::filesystem::path dir;
  std::vector<std::string> written;

  void write(const std::string& name, const std::string& text) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path p = dir / name;
    std::ofstream f(p, std::ios::binary);
    f << text;
    if (!f) throw std::runtime_error("cannot write " + p.string());
    written.push_back(p.string());
  }
};

void log_line(std::ostream* log, const std::string& s) {
  if (log) *log << s << '\n';
}

std::vector<double> sweep_values(const ExperimentSpec& spec, std::string& axis) {
  if (spec.sweep) {
    axis = spec.sweep->axis;
    return spec.sweep->values;
  }
  axis = "tau_u";
  return {static_cast<double>(spec.system.slot_length)};
}

BoundResult evaluate_bound(BoundId id, const OperatingPoint& op, const SystemConfig& sys) {
  switch (id) {
    case BoundId::R1: return r1_bar(op, sys.model, sys.mc);
    case BoundId::R2: return r2_bar(op, sys.model, sys.mc);
    case BoundId::R3: return r3(op, sys.model);
    case BoundId::Ra: return ra(op, sys.model);
  }
  throw std::logic_error("unknown bound");
}

void run_bound_eval(const ExperimentSpec& spec, Output& out, std::ostream* log) {
  std::string axis;
  const std::vector<double> values = sweep_values(spec, axis);
  Csv csv({axis, "bound", "rate", "tau_p", "p_aK", "mc_std_err", "mc_samples"});
  for (double v : values) {
    const SystemConfig sys = apply_axis(spec.system, axis, v);
    const OperatingPoint op = sys.operating_point();
    for (BoundId id : spec.bounds) {
      const BoundResult r = evaluate_bound(id, op, sys);
      csv.row({num(v), std::string(to_string(id)), num(r.value), std::to_string(op.pilot_length),
               num(op.mean_active()), num(r.mc_std_err), std::to_string(r.mc_samples)});
      log_line(log, axis + "=" + num(v) + " " + std::string(to_string(id)) + "=" + num(r.value));
    }
  }
  out.write("bounds.csv", csv.text());
}

void run_methods(const ExperimentSpec& spec, Output& out, std::ostream* log) {
  std::string axis;
  const std::vector<double> values = sweep_values(spec, axis);
  Csv summary({axis, "method", "rate", "tau_p_opt", "p_aK_opt", "mc_std_err", "cost_value",
               "evaluations"});
  Csv rate({axis, "method", "rate", "mc_std_err"});
  Csv tau({axis, "method", "tau_p_opt"});
  Csv load({axis, "method", "p_aK_opt"});
  for (double v : values) {
    const SystemConfig sys = apply_axis(spec.system, axis, v);
    const OperatingPoint base = sys.operating_point();
    for (Method m : spec.methods) {
      const OptimizationResult res = optimize(m, base, sys.model, spec.grid, sys.mc);
      const BoundResult r1 =
          r1_bar(with_point(base, res.tau_p_opt, res.p_aK_opt), sys.model, sys.mc);
      const std::string name(to_string(m));
      summary.row({num(v), name, num(r1.value), std::to_string(res.tau_p_opt), num(res.p_aK_opt),
                   num(r1.mc_std_err), num(res.rate), std::to_string(res.evaluations)});
      rate.row({num(v), name, num(r1.value), num(r1.mc_std_err)});
      tau.row({num(v), name, std::to_string(res.tau_p_opt)});
      load.row({num(v), name, num(res.p_aK_opt)});
      log_line(log, axis + "=" + num(v) + " " + name + " tau_p=" + std::to_string(res.tau_p_opt) +
                        " p_aK=" + num(res.p_aK_opt) + " R1=" + num(r1.value));
    }
  }
  out.write("summary.csv", summary.text());
  out.write("rate.csv", rate.text());
  out.write("tau_p_opt.csv", tau.text());
  out.write("p_aK_opt.csv", load.text());
}

void run_scaling(const ExperimentSpec& spec, Output& out, std::ostream* log) {
  const ScalingSpec& sc = spec.scaling;
  if (!sc.ladder.empty()) {
    const ScalingReport rep = verify_scaling(sc.which, spec.system.model, sc.ladder);
    Csv csv({"case", "M", "tau_u", "tau_p_opt", "tau_p_pred", "p_aK_opt", "p_aK_pred", "rate_opt",
             "rate_pred", "rate_pred_alt", "tau_p_pred_alt", "err_tau_p", "err_tau_p_alt", "err_p_aK",
             "err_rate", "err_rate_alt"});
    for (const LadderPoint& p : rep.points) {
      csv.row({std::string(to_string(sc.which)), std::to_string(p.rung.antennas),
               std::to_string(p.rung.slot_length), std::to_string(p.optimum.tau_p_opt),
               num(p.prediction.tau_p), num(p.optimum.p_aK_opt), num(p.prediction.p_aK),
               num(p.optimum.rate), num(p.prediction.rate), num(p.prediction.rate_alt),
               num(p.prediction.tau_p_alt), num(p.err_tau_p), num(p.err_tau_p_alt),
               num(p.err_p_aK), num(p.err_rate), num(p.err_rate_alt)});
    }
    out.write("scaling.csv", csv.text());
    log_line(log, std::string("tau_p converging: ") + (rep.tau_p_converging ? "yes" : "no") +
                      ", rate converging: " + (rep.rate_converging ? "yes" : "no") +
                      (rep.supported_normalization.empty()
                           ? std::string()
                           : ", supported normalization: " + rep.supported_normalization));
  }
  if (!sc.deltas.empty()) {
    Csv csv({"delta", "a", "b", "rate_scale"});
    for (double d : sc.deltas) {
      const AbSolution ab = solve_ab(d, spec.system.model);
      csv.row({num(d), num(ab.a), num(ab.b), num(ab.rate_scale)});
    }
    out.write("ab.csv", csv.text());
  }
}

ProtocolConfig protocol_config(const ExperimentSpec& spec, const OperatingPoint& op,
                               const SystemConfig& sys) {
  ProtocolConfig cfg;
  cfg.op = op;
  cfg.model = sys.model;
  cfg.n_slots = spec.simulation.n_slots;
  cfg.threshold.zeta = spec.simulation.zeta;
  cfg.rho = spec.simulation.rho;
  cfg.beta_knowledge_error = spec.simulation.beta_knowledge_error;
  return cfg;
}

void run_simulate(const ExperimentSpec& spec, Output& out, std::ostream* log) {
  const SystemConfig& sys = spec.system;
  const OperatingPoint op = sys.operating_point();
  const ProtocolConfig cfg = protocol_config(spec, op, sys);
  const FrameBatch batch = run_frames(cfg, spec.simulation.n_frames, sys.seed);
  Csv csv({"frame", "active", "identified", "sum_rate", "missed_detections", "false_alarms",
           "estimate_nmse"});
  for (std::size_t f = 0; f < batch.frames.size(); ++f) {
    const FrameReport& r = batch.frames[f];
    csv.row({std::to_string(f), std::to_string(r.active.size()), std::to_string(r.identified.size()),
             num(r.sum_rate), std::to_string(r.missed_detections), std::to_string(r.false_alarms),
             num(r.estimate_nmse)});
  }
  out.write("simulation.csv", csv.text());
  log_line(log, "mean sum rate " + num(batch.mean_sum_rate) + " +- " + num(batch.std_err));
  if (spec.simulation.trace) {
    std::ostringstream buf(std::ios::binary);
    TraceWriter w(buf, {kTraceMagic, kTraceVersion, static_cast<std::uint32_t>(op.antennas),
                        static_cast<std::uint32_t>(op.devices),
                        static_cast<std::uint32_t>(op.slot_length),
                        static_cast<std::uint32_t>(op.pilot_length), sys.seed});
    run_frame(cfg, sys.seed, &w);
    out.write("trace.bin", buf.str());
  }
}

void run_compare(const ExperimentSpec& spec, Output& out, std::ostream* log) {
  const SystemConfig& sys = spec.system;
  const OperatingPoint base = sys.operating_point();
  Csv csv({"method", "tau_p", "p_aK", "r1_bar", "r1_std_err", "empirical", "empirical_std_err",
           "sigma", "above_lower", "below_upper"});
  for (Method m : spec.methods) {
    const OptimizationResult res = optimize(m, base, sys.model, spec.grid, sys.mc);
    const OperatingPoint op = with_point(base, res.tau_p_opt, res.p_aK_opt);
    const BoundResult r1 = r1_bar(op, sys.model, sys.mc);
    const FrameBatch batch =
        run_frames(protocol_config(spec, op, sys), spec.simulation.n_frames, sys.seed);
    const double sigma = std::hypot(r1.mc_std_err, batch.std_err);
    const bool lower = batch.mean_sum_rate >= r1.value - 3.0 * sigma;
    const bool upper = batch.mean_sum_rate <= 1.5 * r1.value;
    csv.row({std::string(to_string(m)), std::to_string(op.pilot_length), num(op.mean_active()),
             num(r1.value), num(r1.mc_std_err), num(batch.mean_sum_rate), num(batch.std_err),
             num(sigma), lower ? "1" : "0", upper ? "1" : "0"});
    log_line(log, std::string(to_string(m)) + " r1=" + num(r1.value) +
                      " empirical=" + num(batch.mean_sum_rate));
  }
  out.write("compare.csv", csv.text());
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void print_diags(const std::vector<Diagnostic>& diags, std::ostream& err) {
  for (const Diagnostic& d : diags) err << "error: " << d.field << ": " << d.message << '\n';
}

}  // namespace

std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::BoundEval: return "bound-eval";
    case ExperimentKind::Optimize: return "optimize";
    case ExperimentKind::Sweep: return "sweep";
    case ExperimentKind::ScalingVerify: return "scaling-verify";
    case ExperimentKind::Simulate: return "simulate";
    case ExperimentKind::Compare: return "compare";
  }
  return "?";
}

std::optional<ExperimentKind> parse_experiment_kind(std::string_view name) {
  for (ExperimentKind k : {ExperimentKind::BoundEval, ExperimentKind::Optimize,
                           ExperimentKind::Sweep, ExperimentKind::ScalingVerify,
                           ExperimentKind::Simulate, ExperimentKind::Compare}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

OperatingPoint SystemConfig::operating_point() const {
  OperatingPoint op;
  op.antennas = antennas;
  op.devices = devices;
  op.slot_length = slot_length;
  op.pilot_length = pilot_length.value_or(std::max(1, slot_length / 3));
  op.activation_prob = activation_prob.value_or(0.0);
  return op;
}

ExperimentSpec parse_spec(std::string_view text, std::vector<Diagnostic>& diags) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    throw ParseError(line, col, e.what());
  }
  ExperimentSpec spec;
  Reader rd(diags);
  if (!root.is_object()) {
    rd.fail("<root>", "expected an object");
    return spec;
  }
  rd.keys(root, "", {"kind", "system", "model", "monte_carlo", "seed", "methods", "bounds",
                     "sweep", "grid", "scaling", "simulation", "output"});

  std::string kind;
  if (!rd.string(root, "", "kind", kind)) {
    if (!root.contains("kind")) rd.fail("kind", "missing");
  } else if (auto k = parse_experiment_kind(kind)) {
    spec.kind = *k;
  } else {
    rd.fail("kind", "unknown experiment kind '" + kind + "'");
  }

  SystemConfig& sys = spec.system;
  const json* obj = nullptr;
  if (rd.object(root, "", "system", obj)) {
    rd.keys(*obj, "system", {"antennas", "devices", "slot_length", "pilot_length",
                             "activation_prob", "p_aK"});
    rd.number(*obj, "system", "antennas", sys.antennas);
    rd.number(*obj, "system", "devices", sys.devices);
    rd.number(*obj, "system", "slot_length", sys.slot_length);
    int tp = 0;
    if (rd.number(*obj, "system", "pilot_length", tp)) sys.pilot_length = tp;
    double pa = 0.0;
    if (rd.number(*obj, "system", "activation_prob", pa)) sys.activation_prob = pa;
    double pk = 0.0;
    if (rd.number(*obj, "system", "p_aK", pk)) {
      if (sys.activation_prob) rd.fail("system.p_aK", "give either activation_prob or p_aK");
      sys.activation_prob = sys.devices > 0 ? pk / sys.devices : pk;
    }
  }
  if (rd.object(root, "", "model", obj)) parse_model(rd, *obj, sys.model);
  if (rd.object(root, "", "monte_carlo", obj)) {
    rd.keys(*obj, "monte_carlo", {"n_beta_samples", "eps_tail"});
    rd.number(*obj, "monte_carlo", "n_beta_samples", sys.mc.n_beta_samples);
    rd.number(*obj, "monte_carlo", "eps_tail", sys.mc.eps_tail);
  }
  rd.number(root, "", "seed", sys.seed);
  sys.mc.seed = sys.seed;

  auto string_list = [&](const char* key, auto&& each) {
    if (!root.contains(key)) return;
    const json& v = root.at(key);
    if (!v.is_array()) {
      rd.fail(key, "expected a list");
      return;
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string field = std::string(key) + "[" + std::to_string(i) + "]";
      if (!v[i].is_string()) {
        rd.fail(field, "expected a string");
        continue;
      }
      each(field, v[i].get<std::string>());
    }
  };
  string_list("methods", [&](const std::string& field, const std::string& name) {
    if (auto m = parse_method(name)) {
      spec.methods.push_back(*m);
    } else {
      rd.fail(field, "unknown method '" + name + "'");
    }
  });
  if (root.contains("bounds")) spec.bounds.clear();
  string_list("bounds", [&](const std::string& field, const std::string& name) {
    for (BoundId id : {BoundId::R1, BoundId::R2, BoundId::R3, BoundId::Ra}) {
      if (to_string(id) == name) {
        spec.bounds.push_back(id);
        return;
      }
    }
    rd.fail(field, "unknown bound '" + name + "'");
  });

  if (rd.object(root, "", "sweep", obj)) {
    rd.keys(*obj, "sweep", {"axis", "values"});
    SweepSpec sw;
    rd.string(*obj, "sweep", "axis", sw.axis);
    if (obj->contains("values")) {
      const json& vals = obj->at("values");
      if (!vals.is_array()) {
        rd.fail("sweep.values", "expected a list");
      } else {
        for (std::size_t i = 0; i < vals.size(); ++i) {
          if (vals[i].is_number()) {
            sw.values.push_back(vals[i].get<double>());
          } else {
            rd.fail("sweep.values[" + std::to_string(i) + "]", "expected a number");
          }
        }
      }
    }
    spec.sweep = sw;
  }
  if (rd.object(root, "", "grid", obj)) {
    rd.keys(*obj, "grid", {"tau_p_points", "p_aK_points", "refine_tau_p_points",
                           "refine_p_aK_points", "stages", "tau_p_min", "tau_p_max", "p_aK_min",
                           "p_aK_max", "log_tau_p"});
    GridSpec& g = spec.grid;
    rd.number(*obj, "grid", "tau_p_points", g.tau_p_points);
    rd.number(*obj, "grid", "p_aK_points", g.p_aK_points);
    rd.number(*obj, "grid", "refine_tau_p_points", g.refine_tau_p_points);
    rd.number(*obj, "grid", "refine_p_aK_points", g.refine_p_aK_points);
    rd.number(*obj, "grid", "stages", g.stages);
    rd.number(*obj, "grid", "tau_p_min", g.tau_p_min);
    rd.number(*obj, "grid", "tau_p_max", g.tau_p_max);
    rd.number(*obj, "grid", "p_aK_min", g.p_aK_min);
    rd.number(*obj, "grid", "p_aK_max", g.p_aK_max);
    rd.boolean(*obj, "grid", "log_tau_p", g.log_tau_p);
  }
  if (rd.object(root, "", "scaling", obj)) {
    rd.keys(*obj, "scaling", {"case", "ladder", "deltas"});
    std::string c;
    if (rd.string(*obj, "scaling", "case", c)) {
      if (auto sc = parse_scaling_case(c)) {
        spec.scaling.which = *sc;
      } else {
        rd.fail("scaling.case", "expected case1, case2, case3 or case4");
      }
    }
    if (obj->contains("ladder")) {
      const json& lad = obj->at("ladder");
      if (!lad.is_array()) {
        rd.fail("scaling.ladder", "expected a list");
      } else {
        for (std::size_t i = 0; i < lad.size(); ++i) {
          const std::string path = "scaling.ladder[" + std::to_string(i) + "]";
          if (!lad[i].is_object()) {
            rd.fail(path, "expected an object");
            continue;
          }
          rd.keys(lad[i], path, {"antennas", "slot_length"});
          LadderRung r;
          rd.number(lad[i], path, "antennas", r.antennas);
          rd.number(lad[i], path, "slot_length", r.slot_length);
          spec.scaling.ladder.push_back(r);
        }
      }
    }
    if (obj->contains("deltas")) {
      const json& ds = obj->at("deltas");
      if (!ds.is_array()) {
        rd.fail("scaling.deltas", "expected a list");
      } else {
        for (std::size_t i = 0; i < ds.size(); ++i) {
          if (ds[i].is_number()) {
            spec.scaling.deltas.push_back(ds[i].get<double>());
          } else {
            rd.fail("scaling.deltas[" + std::to_string(i) + "]", "expected a number");
          }
        }
      }
    }
  }
  if (rd.object(root, "", "simulation", obj)) {
    rd.keys(*obj, "simulation", {"n_slots", "n_frames", "zeta", "rho", "beta_knowledge_error",
                                 "trace"});
    SimulationSpec& s = spec.simulation;
    rd.number(*obj, "simulation", "n_slots", s.n_slots);
    rd.number(*obj, "simulation", "n_frames", s.n_frames);
    rd.number(*obj, "simulation", "zeta", s.zeta);
    rd.number(*obj, "simulation", "rho", s.rho);
    rd.number(*obj, "simulation", "beta_knowledge_error", s.beta_knowledge_error);
    rd.boolean(*obj, "simulation", "trace", s.trace);
  }
  if (rd.object(root, "", "output", obj)) {
    rd.keys(*obj, "output", {"dir"});
    rd.string(*obj, "output", "dir", spec.output_dir);
  }
  return spec;
}

SystemConfig apply_axis(const SystemConfig& base, const std::string& axis, double value) {
  SystemConfig s = base;
  const auto as_int = [&](const char* field) {
    if (value != std::floor(value) || std::abs(value) > 2e9) {
      throw ConfigError(std::string("sweep.values (") + field + ")", "expected an integer value");
    }
    return static_cast<int>(value);
  };
  if (axis == "tau_u") {
    s.slot_length = as_int("tau_u");
  } else if (axis == "M") {
    s.antennas = as_int("M");
  } else if (axis == "K") {
    const double load = base.activation_prob.value_or(0.0) * base.devices;
    s.devices = as_int("K");
    if (base.activation_prob) s.activation_prob = load / s.devices;  // keep p_aK fixed
  } else if (axis == "alpha") {
    if (auto* m = std::get_if<UniformPowerError>(&s.model)) {
      m->alpha = value;
    } else if (auto* d = std::get_if<UniformDistance>(&s.model)) {
      d->alpha = value;
    } else {
      throw ConfigError("sweep.axis", "alpha applies to model1 and model3 only");
    }
  } else if (axis == "sigma_v2") {
    auto* m = std::get_if<LogNormalShadowing>(&s.model);
    if (!m) throw ConfigError("sweep.axis", "sigma_v2 applies to model2 only");
    m->sigma_v2 = value;
  } else if (axis == "delta_bar") {
    std::visit([&](auto& m) { m.delta_bar = value; }, s.model);
  } else {
    throw ConfigError("sweep.axis", "unknown axis '" + axis + "'");
  }
  return s;
}

std::vector<Diagnostic> validate(const ExperimentSpec& spec) {
  std::vector<Diagnostic> d;
  auto check_system = [&](const SystemConfig& s, const std::string& where) {
    const std::string sfx = where.empty() ? "" : " (" + where + ")";
    if (s.antennas < 2) d.push_back({"system.antennas", "must be >= 2" + sfx});
    if (s.devices < 1) d.push_back({"system.devices", "must be >= 1" + sfx});
    if (s.slot_length < 1) d.push_back({"system.slot_length", "must be >= 1" + sfx});
    if (s.pilot_length) {
      if (*s.pilot_length < 1) d.push_back({"system.pilot_length", "must be >= 1" + sfx});
      if (*s.pilot_length > s.slot_length) {
        d.push_back({"system.pilot_length", "exceeds system.slot_length (tau_p > tau_u)" + sfx});
      }
    }
    if (s.activation_prob && !(*s.activation_prob >= 0.0 && *s.activation_prob <= 1.0)) {
      d.push_back({"system.activation_prob", "must lie in [0, 1]" + sfx});
    }
    try {
      validate_model(s.model);
    } catch (const std::exception& e) {
      d.push_back({"model", e.what() + sfx});
    }
  };

  const SystemConfig& sys = spec.system;
  check_system(sys, "");
  if (sys.mc.n_beta_samples < 1) d.push_back({"monte_carlo.n_beta_samples", "must be >= 1"});
  if (!(sys.mc.eps_tail > 0.0 && sys.mc.eps_tail < 1.0)) {
    d.push_back({"monte_carlo.eps_tail", "must lie in (0, 1)"});
  }

  if (spec.sweep) {
    static const std::set<std::string> axes{"tau_u", "M", "K", "alpha", "sigma_v2", "delta_bar"};
    if (!axes.count(spec.sweep->axis)) {
      d.push_back({"sweep.axis", "expected one of tau_u, M, K, alpha, sigma_v2, delta_bar"});
    } else if (spec.sweep->values.empty()) {
      d.push_back({"sweep.values", "empty sweep list"});
    } else {
      for (double v : spec.sweep->values) {
        try {
          check_system(apply_axis(sys, spec.sweep->axis, v), spec.sweep->axis + "=" + num(v));
        } catch (const ConfigError& e) {
          d.push_back({e.field(), e.what()});
        }
      }
    }
  } else if (spec.kind == ExperimentKind::Sweep) {
    d.push_back({"sweep", "required for kind sweep"});
  }

  const bool needs_methods = spec.kind == ExperimentKind::Optimize ||
                             spec.kind == ExperimentKind::Sweep ||
                             spec.kind == ExperimentKind::Compare;
  if (needs_methods && spec.methods.empty()) d.push_back({"methods", "at least one method required"});
  const bool needs_point = spec.kind == ExperimentKind::BoundEval ||
                           spec.kind == ExperimentKind::Simulate;
  if (needs_point) {
    if (!sys.pilot_length) d.push_back({"system.pilot_length", "required for " + std::string(to_string(spec.kind))});
    if (!sys.activation_prob) d.push_back({"system.activation_prob", "required for " + std::string(to_string(spec.kind))});
  }
  if (spec.kind == ExperimentKind::BoundEval) {
    if (spec.bounds.empty()) d.push_back({"bounds", "at least one bound required"});
    const bool wants_r3 = std::find(spec.bounds.begin(), spec.bounds.end(), BoundId::R3) != spec.bounds.end();
    if (wants_r3 && sys.activation_prob && *sys.activation_prob * sys.devices < 1.0) {
      d.push_back({"bounds", "R3 requires p_aK >= 1"});
    }
  }
  const bool heuristic = std::any_of(spec.methods.begin(), spec.methods.end(), [](Method m) {
    return m == Method::Ra1D || m == Method::Rh0 || m == Method::Rh1D;
  });
  if (needs_methods && heuristic && sys.slot_length < 3 && !spec.sweep) {
    d.push_back({"system.slot_length", "heuristic methods need tau_u >= 3"});
  }

  const GridSpec& g = spec.grid;
  if (g.tau_p_points < 1 || g.p_aK_points < 1) d.push_back({"grid", "empty search grid"});
  if (g.refine_tau_p_points < 1 || g.refine_p_aK_points < 1) {
    d.push_back({"grid", "refinement grids must have at least one point"});
  }
  if (g.stages < 1) d.push_back({"grid.stages", "must be >= 1"});
  if (!(g.p_aK_min > 0.0)) d.push_back({"grid.p_aK_min", "must be > 0"});
  if (g.p_aK_max != 0.0 && g.p_aK_max < g.p_aK_min) d.push_back({"grid.p_aK_max", "below grid.p_aK_min"});
  if (g.tau_p_min < 1) d.push_back({"grid.tau_p_min", "must be >= 1"});
  if (g.tau_p_max != 0 && g.tau_p_max < g.tau_p_min) d.push_back({"grid.tau_p_max", "below grid.tau_p_min"});

  if (spec.kind == ExperimentKind::ScalingVerify) {
    if (spec.scaling.ladder.empty() && spec.scaling.deltas.empty()) {
      d.push_back({"scaling", "needs a ladder or a deltas list"});
    }
    for (std::size_t i = 0; i < spec.scaling.ladder.size(); ++i) {
      const LadderRung& r = spec.scaling.ladder[i];
      if (r.antennas < 2 || r.slot_length < 2) {
        d.push_back({"scaling.ladder[" + std::to_string(i) + "]", "antennas and slot_length must be >= 2"});
      }
    }
    for (double x : spec.scaling.deltas) {
      if (!(x > 0.0)) d.push_back({"scaling.deltas", "values must be > 0"});
    }
  }
  if (spec.kind == ExperimentKind::Simulate || spec.kind == ExperimentKind::Compare) {
    const SimulationSpec& s = spec.simulation;
    if (s.n_slots < 1) d.push_back({"simulation.n_slots", "must be >= 1"});
    if (s.n_frames < 1) d.push_back({"simulation.n_frames", "must be >= 1"});
    if (!(s.zeta > 0.0)) d.push_back({"simulation.zeta", "must be > 0"});
    if (!(s.rho > 0.0 && s.rho <= 1.0)) d.push_back({"simulation.rho", "must lie in (0, 1]"});
    if (!(s.beta_knowledge_error > 0.0)) d.push_back({"simulation.beta_knowledge_error", "must be > 0"});
  }
  if (spec.output_dir.empty()) d.push_back({"output.dir", "must not be empty"});
  return d;
}

std::vector<std::string> run(const ExperimentSpec& spec, std::ostream* log) {
  Output out{spec.output_dir, {}};
  switch (spec.kind) {
    case ExperimentKind::BoundEval: run_bound_eval(spec, out, log); break;
    case ExperimentKind::Optimize:
    case ExperimentKind::Sweep: run_methods(spec, out, log); break;
    case ExperimentKind::ScalingVerify: run_scaling(spec, out, log); break;
    case ExperimentKind::Simulate: run_simulate(spec, out, log); break;
    case ExperimentKind::Compare: run_compare(spec, out, log); break;
  }
  return out.written;
}

namespace {

int load(const std::string& path, ExperimentSpec& spec, std::ostream& err) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitParse;
  }
  std::vector<Diagnostic> diags;
  try {
    spec = parse_spec(text, diags);
  } catch (const ParseError& e) {
    err << path << ':' << e.line() << ':' << e.column() << ": parse error: " << e.what() << '\n';
    return kExitParse;
  }
  if (!diags.empty()) {
    print_diags(diags, err);
    return kExitInvalid;
  }
  return kExitOk;
}

}  // namespace

int validate_file(const std::string& path, std::ostream& out, std::ostream& err) {
  ExperimentSpec spec;
  if (const int rc = load(path, spec, err); rc != kExitOk) return rc;
  const std::vector<Diagnostic> diags = validate(spec);
  if (!diags.empty()) {
    print_diags(diags, err);
    return kExitInvalid;
  }
  out << path << ": ok\n";
  return kExitOk;
}

int run_file(const std::string& path, const RunOptions& opts, std::ostream& out,
             std::ostream& err) {
  ExperimentSpec spec;
  if (const int rc = load(path, spec, err); rc != kExitOk) return rc;
  if (opts.seed) {
    spec.system.seed = *opts.seed;
    spec.system.mc.seed = *opts.seed;
  }
  if (opts.out_dir) spec.output_dir = *opts.out_dir;
  const std::vector<Diagnostic> diags = validate(spec);
  if (!diags.empty()) {
    print_diags(diags, err);
    return kExitInvalid;
  }
  set_worker_count(opts.jobs);
  try {
    for (const std::string& f : run(spec, &err)) out << f << '\n';
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitOk;
}

}  // namespace rpda
