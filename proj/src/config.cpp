#include "dsdc/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/core.h>
#include <fmt/format.h>

namespace dsdc {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"kernel",
       {"theta.form", "theta.a", "theta.p", "theta.values", "kappa.form", "kappa.c", "kappa.size",
        "kappa.values", "class"}},
      {"init", {"family", "a", "r", "q", "values"}},
      {"run", {"n", "T", "samples", "tail_cutoffs", "eta", "delta"}},
      {"integrator",
       {"method", "rel_tol", "abs_tol", "h", "h_init", "h_min", "h_max", "clamp_tol", "max_steps",
        "rhs_path"}},
      {"checks", {"bounds", "C", "kappa0", "zeta", "C_uniform", "t1", "t2", "n_probe"}},
      {"sweep",
       {"n_list", "delta", "gel_time_stabilization", "loss_ratio", "oracle_max_n", "oracle_h"}},
      {"output", {"dir", "csv", "report", "sweep", "head_size"}},
  };
  return s;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct Entry {
  std::string value;
  std::size_t line = 0;
};

// Raw section.key -> value map with line numbers, plus typed accessors that
// report the offending key on failure.
class Document {
 public:
  explicit Document(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    std::string section;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
      ++line;
      if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
      const std::string l = trim(raw);
      if (l.empty()) continue;
      if (l.front() == '[') {
        if (l.back() != ']') throw ConfigError(fmt::format("line {}: malformed section header", line), line);
        section = trim(std::string_view(l).substr(1, l.size() - 2));
        if (!schema().contains(section)) {
          throw ConfigError(fmt::format("line {}: unknown section [{}]", line, section), line);
        }
        continue;
      }
      const auto eq = l.find('=');
      if (eq == std::string::npos) {
        throw ConfigError(fmt::format("line {}: expected 'key = value'", line), line);
      }
      if (section.empty()) {
        throw ConfigError(fmt::format("line {}: key outside of any section", line), line);
      }
      const std::string key = trim(std::string_view(l).substr(0, eq));
      const std::string value = trim(std::string_view(l).substr(eq + 1));
      if (!schema().at(section).contains(key)) {
        throw ConfigError(fmt::format("line {}: unknown key '{}' in [{}]", line, key, section), line);
      }
      const std::string full = section + "." + key;
      if (entries_.contains(full)) {
        throw ConfigError(fmt::format("line {}: duplicate key '{}'", line, full), line);
      }
      entries_[full] = Entry{value, line};
    }
  }

  bool has(const std::string& key) const { return entries_.contains(key); }
  std::size_t line(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    const std::size_t l = line(key);
    if (l > 0) throw ConfigError(fmt::format("line {}: {}: {}", l, key, msg), l);
    throw ConfigError(fmt::format("{}: {}", key, msg));
  }

  std::string str(const std::string& key, const std::string& fallback) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second.value;
  }

  double real(const std::string& key, double fallback) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? fallback : to_real(key, it->second.value);
  }

  std::optional<double> opt_real(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return to_real(key, it->second.value);
  }

  std::size_t count(const std::string& key, std::size_t fallback) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? fallback : to_count(key, it->second.value);
  }

  std::vector<std::string> list(const std::string& key) const {
    std::vector<std::string> out;
    auto it = entries_.find(key);
    if (it == entries_.end()) return out;
    std::string item;
    std::istringstream in(it->second.value);
    while (std::getline(in, item, ',')) {
      item = trim(item);
      if (item.empty()) fail(key, "empty list element");
      out.push_back(item);
    }
    return out;
  }

  std::vector<double> reals(const std::string& key) const {
    std::vector<double> out;
    for (const auto& s : list(key)) out.push_back(to_real(key, s));
    return out;
  }

  std::vector<std::size_t> counts(const std::string& key) const {
    std::vector<std::size_t> out;
    for (const auto& s : list(key)) out.push_back(to_count(key, s));
    return out;
  }

 private:
  double to_real(const std::string& key, const std::string& s) const {
    double v = 0.0;
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end || !std::isfinite(v)) fail(key, fmt::format("'{}' is not a finite number", s));
    return v;
  }

  std::size_t to_count(const std::string& key, const std::string& s) const {
    std::size_t v = 0;
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end) fail(key, fmt::format("'{}' is not a non-negative integer", s));
    return v;
  }

  std::map<std::string, Entry> entries_;
};

KernelSpec parse_kernel(const Document& doc) {
  KernelSpec spec;
  const std::string tf = doc.str("kernel.theta.form", "power");
  try {
    if (tf == "power") {
      spec.theta = ThetaSequence::power(doc.real("kernel.theta.a", 1.0), doc.real("kernel.theta.p", 1.0));
    } else if (tf == "table") {
      spec.theta = ThetaSequence::table(doc.reals("kernel.theta.values"));
    } else {
      doc.fail("kernel.theta.form", fmt::format("unknown form '{}' (power | table)", tf));
    }
  } catch (const ValidationError& e) {
    doc.fail(tf == "power" ? "kernel.theta.a" : "kernel.theta.values", e.what());
  }

  const std::string kf = doc.str("kernel.kappa.form", "zero");
  try {
    if (kf == "zero") {
      spec.kappa = KappaModel::zero();
    } else if (kf == "scaled_product") {
      spec.kappa = KappaModel::scaled_product(doc.real("kernel.kappa.c", 0.0));
    } else if (kf == "table") {
      auto values = doc.reals("kernel.kappa.values");
      const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(values.size()))));
      spec.kappa = KappaModel::table(doc.count("kernel.kappa.size", side), std::move(values));
    } else {
      doc.fail("kernel.kappa.form", fmt::format("unknown form '{}' (zero | scaled_product | table)", kf));
    }
  } catch (const ValidationError& e) {
    doc.fail(kf == "table" ? "kernel.kappa.values" : "kernel.kappa.c", e.what());
  }

  try {
    spec.declared_class = declared_class_from_string(doc.str("kernel.class", "unclassified"));
  } catch (const ValidationError& e) {
    doc.fail("kernel.class", e.what());
  }
  return spec;
}

InitialData parse_init(const Document& doc) {
  const std::string fam = doc.str("init.family", "monodisperse");
  const double a = doc.real("init.a", 1.0);
  if (a < 0.0) doc.fail("init.a", "must be non-negative");
  if (fam == "monodisperse") return Monodisperse{a};
  if (fam == "geometric") {
    const double r = doc.real("init.r", 0.5);
    if (!(r > 0.0 && r < 1.0)) doc.fail("init.r", "must lie in (0, 1)");
    return Geometric{a, r};
  }
  if (fam == "power_tail") {
    const double q = doc.real("init.q", 2.0);
    if (!(q > 1.0)) doc.fail("init.q", fmt::format("must exceed 1 (got {})", q));
    return PowerTail{a, q};
  }
  if (fam == "table") {
    auto v = doc.reals("init.values");
    if (v.empty()) doc.fail("init.values", "table family needs values");
    for (double x : v) {
      if (x < 0.0) doc.fail("init.values", "entries must be non-negative");
    }
    return TableInit{std::move(v)};
  }
  doc.fail("init.family", fmt::format("unknown family '{}' (monodisperse | geometric | power_tail | table)", fam));
}

RhsPath rhs_path_from_string(const std::string& s) {
  if (s == "automatic") return RhsPath::automatic;
  if (s == "general") return RhsPath::general;
  if (s == "separable") return RhsPath::separable;
  throw ValidationError(fmt::format("unknown rhs path '{}'", s));
}

std::string to_string(RhsPath p) {
  switch (p) {
    case RhsPath::general: return "general";
    case RhsPath::separable: return "separable";
    case RhsPath::automatic: break;
  }
  return "automatic";
}

std::string join_reals(const std::vector<double>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) out += fmt::format("{}{}", k ? ", " : "", v[k]);
  return out;
}

std::string join_counts(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) out += fmt::format("{}{}", k ? ", " : "", v[k]);
  return out;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  const Document doc(text);
  RunConfig cfg;
  cfg.kernel = parse_kernel(doc);
  cfg.init = parse_init(doc);

  auto& run = cfg.run;
  run.n = doc.count("run.n", run.n);
  if (run.n == 0) doc.fail("run.n", "must be at least 1");
  run.T = doc.real("run.T", run.T);
  if (!(run.T > 0.0)) doc.fail("run.T", fmt::format("must be positive (got {})", run.T));
  run.samples = doc.count("run.samples", run.samples);
  if (run.samples == 0) doc.fail("run.samples", "must be at least 1");
  if (doc.has("run.tail_cutoffs")) {
    run.tail_cutoffs = doc.counts("run.tail_cutoffs");
    for (std::size_t r : run.tail_cutoffs) {
      if (r == 0 || r > run.n) doc.fail("run.tail_cutoffs", fmt::format("cutoff {} outside [1, n]", r));
    }
  } else {
    std::erase_if(run.tail_cutoffs, [&](std::size_t r) { return r > run.n; });
  }
  run.eta = doc.real("run.eta", run.eta);
  if (!(run.eta > 0.0 && run.eta < 1.0)) doc.fail("run.eta", "must lie in (0, 1)");
  run.delta = doc.real("run.delta", run.delta);
  if (!(run.delta > 0.0 && run.delta < 1.0)) doc.fail("run.delta", "must lie in (0, 1)");

  auto& ic = cfg.integrator;
  try {
    ic.method = method_from_string(doc.str("integrator.method", to_string(ic.method)));
  } catch (const ValidationError& e) {
    doc.fail("integrator.method", e.what());
  }
  try {
    ic.rhs_path = rhs_path_from_string(doc.str("integrator.rhs_path", "automatic"));
  } catch (const ValidationError& e) {
    doc.fail("integrator.rhs_path", e.what());
  }
  ic.rel_tol = doc.real("integrator.rel_tol", ic.rel_tol);
  ic.abs_tol = doc.real("integrator.abs_tol", ic.abs_tol);
  ic.h_fixed = doc.real("integrator.h", ic.h_fixed);
  ic.h_init = doc.real("integrator.h_init", ic.h_init);
  ic.h_min = doc.real("integrator.h_min", ic.h_min);
  ic.h_max = doc.real("integrator.h_max", ic.h_max);
  ic.clamp_tol = doc.opt_real("integrator.clamp_tol");
  ic.max_steps = doc.count("integrator.max_steps", ic.max_steps);
  try {
    ic.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(fmt::format("[integrator]: {}", e.what()));
  }

  auto& ch = cfg.checks;
  if (doc.has("checks.bounds")) {
    const auto names = doc.list("checks.bounds");
    if (names.size() == 1 && names[0] == "all") {
      ch.bounds = all_bound_ids();
    } else if (names.size() == 1 && names[0] == "none") {
      ch.bounds.clear();
    } else {
      ch.bounds.clear();
      for (const auto& name : names) {
        try {
          ch.bounds.push_back(bound_id_from_string(name));
        } catch (const ValidationError& e) {
          doc.fail("checks.bounds", e.what());
        }
      }
    }
  }
  ch.C = doc.opt_real("checks.C");
  if (ch.C && !(*ch.C > 0.0)) doc.fail("checks.C", "must be positive");
  ch.kappa0 = doc.opt_real("checks.kappa0");
  if (ch.kappa0 && !(*ch.kappa0 > 1.0 && *ch.kappa0 < 2.0)) doc.fail("checks.kappa0", "must lie in (1, 2)");
  ch.zeta = doc.opt_real("checks.zeta");
  if (ch.zeta && !(*ch.zeta > 0.0)) doc.fail("checks.zeta", "must be positive");
  ch.C_uniform = doc.opt_real("checks.C_uniform");
  if (ch.C_uniform && !(*ch.C_uniform > 0.0)) doc.fail("checks.C_uniform", "must be positive");
  ch.t1 = doc.opt_real("checks.t1");
  ch.t2 = doc.opt_real("checks.t2");
  if (ch.t1 && (*ch.t1 < 0.0 || *ch.t1 > run.T)) doc.fail("checks.t1", "must lie in [0, T]");
  if (ch.t2 && (*ch.t2 <= 0.0 || *ch.t2 > run.T)) doc.fail("checks.t2", "must lie in (0, T]");
  if (ch.t1.value_or(0.0) >= ch.t2.value_or(run.T)) doc.fail("checks.t2", "must exceed checks.t1");
  ch.n_probe = doc.count("checks.n_probe", ch.n_probe);
  if (ch.n_probe != 0 && ch.n_probe < 8) doc.fail("checks.n_probe", "must be 0 (automatic) or at least 8");

  auto& sw = cfg.sweep;
  sw.n_list = doc.counts("sweep.n_list");
  for (std::size_t k = 0; k < sw.n_list.size(); ++k) {
    if (sw.n_list[k] == 0 || (k > 0 && sw.n_list[k] <= sw.n_list[k - 1])) {
      doc.fail("sweep.n_list", "must be strictly ascending positive integers");
    }
  }
  if (!sw.n_list.empty() && sw.n_list.size() < 3) doc.fail("sweep.n_list", "needs at least 3 entries");
  sw.delta = doc.real("sweep.delta", sw.delta);
  if (!(sw.delta > 0.0 && sw.delta < 1.0)) doc.fail("sweep.delta", "must lie in (0, 1)");
  sw.gel_time_stabilization = doc.real("sweep.gel_time_stabilization", sw.gel_time_stabilization);
  if (!(sw.gel_time_stabilization > 0.0)) doc.fail("sweep.gel_time_stabilization", "must be positive");
  sw.loss_ratio = doc.real("sweep.loss_ratio", sw.loss_ratio);
  if (!(sw.loss_ratio > 0.0 && sw.loss_ratio <= 1.0)) doc.fail("sweep.loss_ratio", "must lie in (0, 1]");
  sw.oracle_max_n = doc.count("sweep.oracle_max_n", sw.oracle_max_n);
  if (sw.oracle_max_n > 64) doc.fail("sweep.oracle_max_n", "oracle runs are limited to n <= 64");
  sw.oracle_h = doc.real("sweep.oracle_h", sw.oracle_h);
  if (!(sw.oracle_h > 0.0)) doc.fail("sweep.oracle_h", "must be positive");

  auto& out = cfg.output;
  out.dir = doc.str("output.dir", out.dir);
  out.csv = doc.str("output.csv", out.csv);
  out.report = doc.str("output.report", out.report);
  out.sweep = doc.str("output.sweep", out.sweep);
  out.head_size = doc.count("output.head_size", out.head_size);
  for (const char* key : {"output.dir", "output.csv", "output.report", "output.sweep"}) {
    if (doc.has(key) && doc.str(key, "").empty()) doc.fail(key, "must not be empty");
  }

  if (const auto m = cfg.kernel.max_index(); m && *m < run.n) {
    doc.fail("run.n", fmt::format("kernel is tabulated only up to {}", *m));
  }
  for (std::size_t n : sw.n_list) {
    if (const auto m = cfg.kernel.max_index(); m && *m < n) {
      doc.fail("sweep.n_list", fmt::format("kernel is tabulated only up to {}", *m));
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string emit_config(const RunConfig& cfg) {
  fmt::memory_buffer b;
  auto out = std::back_inserter(b);

  fmt::format_to(out, "[kernel]\n");
  std::visit(overloaded{[&](const PowerTheta& f) {
                          fmt::format_to(out, "theta.form = power\ntheta.a = {}\ntheta.p = {}\n", f.a, f.p);
                        },
                        [&](const TableTheta& f) {
                          fmt::format_to(out, "theta.form = table\ntheta.values = {}\n", join_reals(f.values));
                        }},
             cfg.kernel.theta.form());
  std::visit(overloaded{[&](const ZeroKappa&) { fmt::format_to(out, "kappa.form = zero\n"); },
                        [&](const ScaledProductKappa& f) {
                          fmt::format_to(out, "kappa.form = scaled_product\nkappa.c = {}\n", f.c);
                        },
                        [&](const TableKappa& f) {
                          fmt::format_to(out, "kappa.form = table\nkappa.size = {}\nkappa.values = {}\n",
                                         f.size, join_reals(f.values));
                        }},
             cfg.kernel.kappa.form());
  fmt::format_to(out, "class = {}\n", to_string(cfg.kernel.declared_class));

  fmt::format_to(out, "\n[init]\n");
  std::visit(overloaded{[&](const Monodisperse& f) { fmt::format_to(out, "family = monodisperse\na = {}\n", f.a); },
                        [&](const Geometric& f) {
                          fmt::format_to(out, "family = geometric\na = {}\nr = {}\n", f.a, f.r);
                        },
                        [&](const PowerTail& f) {
                          fmt::format_to(out, "family = power_tail\na = {}\nq = {}\n", f.a, f.q);
                        },
                        [&](const TableInit& f) {
                          fmt::format_to(out, "family = table\nvalues = {}\n", join_reals(f.values));
                        }},
             cfg.init);

  const auto& run = cfg.run;
  fmt::format_to(out, "\n[run]\nn = {}\nT = {}\nsamples = {}\n", run.n, run.T, run.samples);
  if (!run.tail_cutoffs.empty()) fmt::format_to(out, "tail_cutoffs = {}\n", join_counts(run.tail_cutoffs));
  fmt::format_to(out, "eta = {}\ndelta = {}\n", run.eta, run.delta);

  const auto& ic = cfg.integrator;
  fmt::format_to(out,
                 "\n[integrator]\nmethod = {}\nrhs_path = {}\nrel_tol = {}\nabs_tol = {}\nh = {}\n"
                 "h_init = {}\nh_min = {}\nh_max = {}\nmax_steps = {}\n",
                 to_string(ic.method), to_string(ic.rhs_path), ic.rel_tol, ic.abs_tol, ic.h_fixed,
                 ic.h_init, ic.h_min, ic.h_max, ic.max_steps);
  if (ic.clamp_tol) fmt::format_to(out, "clamp_tol = {}\n", *ic.clamp_tol);

  const auto& ch = cfg.checks;
  fmt::format_to(out, "\n[checks]\n");
  if (ch.bounds.empty()) {
    fmt::format_to(out, "bounds = none\n");
  } else {
    std::string names;
    for (std::size_t k = 0; k < ch.bounds.size(); ++k) names += (k ? ", " : "") + to_string(ch.bounds[k]);
    fmt::format_to(out, "bounds = {}\n", names);
  }
  auto opt = [&](const char* key, const std::optional<double>& v) {
    if (v) fmt::format_to(out, "{} = {}\n", key, *v);
  };
  opt("C", ch.C);
  opt("kappa0", ch.kappa0);
  opt("zeta", ch.zeta);
  opt("C_uniform", ch.C_uniform);
  opt("t1", ch.t1);
  opt("t2", ch.t2);
  fmt::format_to(out, "n_probe = {}\n", ch.n_probe);

  const auto& sw = cfg.sweep;
  fmt::format_to(out, "\n[sweep]\n");
  if (!sw.n_list.empty()) fmt::format_to(out, "n_list = {}\n", join_counts(sw.n_list));
  fmt::format_to(out,
                 "delta = {}\ngel_time_stabilization = {}\nloss_ratio = {}\noracle_max_n = {}\n"
                 "oracle_h = {}\n",
                 sw.delta, sw.gel_time_stabilization, sw.loss_ratio, sw.oracle_max_n, sw.oracle_h);

  const auto& o = cfg.output;
  fmt::format_to(out, "\n[output]\ndir = {}\ncsv = {}\nreport = {}\nsweep = {}\nhead_size = {}\n", o.dir,
                 o.csv, o.report, o.sweep, o.head_size);
  return fmt::to_string(b);
}

}  // namespace dsdc
