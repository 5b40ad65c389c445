#include "mzzb/cli.hpp"

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <utility>

#include "CLI11.hpp"
#include "mzzb/csv.hpp"
#include "mzzb/error.hpp"
#include "mzzb/montecarlo.hpp"
#include "mzzb/pe_kernel.hpp"
#include "mzzb/scenario_io.hpp"
#include "mzzb/special_math.hpp"
#include "mzzb/zzb.hpp"

namespace mzzb {

using nlohmann::json;

namespace {

struct Options {
  std::string command;
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::string format = "csv";
};

std::string get_string(const json& section, const std::string& base, const char* key, const std::string& fallback) {
  auto it = section.find(key);
  if (it == section.end()) return fallback;
  if (!it->is_string()) throw ConfigError(base + "/" + key, "expected a string");
  return it->get<std::string>();
}

std::optional<double> get_number(const json& section, const std::string& base, const char* key) {
  auto it = section.find(key);
  if (it == section.end()) return std::nullopt;
  if (!it->is_number()) throw ConfigError(base + "/" + key, "expected a number");
  return it->get<double>();
}

std::optional<std::size_t> get_count(const json& section, const std::string& base, const char* key) {
  auto it = section.find(key);
  if (it == section.end()) return std::nullopt;
  if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<long long>() >= 0)) {
    throw ConfigError(base + "/" + key, "expected a nonnegative integer");
  }
  return it->get<std::size_t>();
}

std::optional<Vec> get_vector(const json& section, const std::string& base, const char* key, std::size_t dim) {
  auto it = section.find(key);
  if (it == section.end()) return std::nullopt;
  if (!it->is_array() || it->size() != dim) {
    throw ConfigError(base + "/" + key, "expected an array of " + std::to_string(dim) + " numbers");
  }
  Vec v(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    if (!(*it)[i].is_number()) throw ConfigError(base + "/" + key + "/" + std::to_string(i), "expected a number");
    v[static_cast<Eigen::Index>(i)] = (*it)[i].get<double>();
  }
  return v;
}

// --- bound ---------------------------------------------------------------------

bool scalar_interval(const Scenario& s) { return s.prior.dim() == 1 && !s.prior.is_lattice(0); }

GaussianLaw pooled_or_gaussian(const NoiseLaw& law) { return law.as_gaussian() ? *law.as_gaussian() : law.moments(); }

BoundResult closed_form_bound(const Scenario& s, bool asymptotic) {
  if (!scalar_interval(s)) throw ConfigError("/bound/method", "closed form needs a scalar continuous prior");
  const NoiseLaw& law = s.truth.noise();
  GammaCase which = law.as_gaussian() ? GammaCase::CovarianceMismatch : GammaCase::MixturePooled;
  double gamma;
  try {
    gamma = gamma_from_scenario(s.assumed, s.truth, which);
  } catch (const UnsupportedVariant& e) {
    throw ConfigError("/bound/method", std::string("closed form not applicable: ") + e.what());
  }
  BoundResult r;
  if (asymptotic) {
    r.value = zzb_asymptotic_q_linear(gamma);
    r.method = "asymptotic";
  } else {
    r.value = zzb_closed_form_q_linear(gamma, s.prior.width(0));
    r.method = law.as_gaussian() ? "closed_form" : "closed_form_pooled";
  }
  return r;
}

BoundResult symmetric_bound(const Scenario& s) {
  if (!scalar_interval(s)) throw ConfigError("/bound/method", "symmetric quadrature needs a scalar continuous prior");
  const PeKernel kernel(s.assumed, s.truth);
  try {
    (void)equal_linear_terms(kernel, Vec::Ones(1));
  } catch (const UnsupportedVariant& e) {
    throw ConfigError("/bound/method", std::string("symmetric quadrature not applicable: ") + e.what());
  }
  return zzb_scalar_symmetric(s.prior.width(0), [&](double h) {
    const EqualLinearTerms t = equal_linear_terms(kernel, Vec::Constant(1, h));
    return q_ratio(t.z_plus, t.sigma);
  });
}

BoundResult general_bound(const Scenario& s) {
  if (!scalar_interval(s)) throw ConfigError("/bound/method", "general quadrature needs a scalar continuous prior");
  const PeKernel kernel(s.assumed, s.truth);
  const double lo = s.prior.lower(0);
  return zzb_scalar_general(s.prior.width(0), [&](double t, double h) {
    return pe_analytic(kernel, Vec::Constant(1, lo + t), Vec::Constant(1, h));
  });
}

BoundResult vector_bound(const Scenario& s, std::optional<double> stub) {
  const std::size_t n = s.prior.dim();
  Vec a = get_vector(s.bound, "/bound", "direction", n).value_or(Vec::Unit(static_cast<Eigen::Index>(n), 0));
  VectorBoundSpec spec(a, s.prior);
  const PeKernel kernel(s.assumed, s.truth);
  if (stub) {
    spec.pe_independent = [v = *stub](const Vec&) { return v; };
  } else {
    spec.pe = [&kernel](const Vec& theta_o, const Vec& delta) { return pe_analytic(kernel, theta_o, delta); };
  }
  return zzb_vector(spec);
}

BoundResult compute_bound(const Scenario& s) {
  const std::string method = get_string(s.bound, "/bound", "method", "auto");
  if (method == "pe_stub") {
    const auto v = get_number(s.bound, "/bound", "pe_stub");
    if (!v) throw ConfigError("/bound/pe_stub", "missing constant error probability for the stub");
    if (!(*v >= 0.0 && *v <= 1.0)) throw ConfigError("/bound/pe_stub", "error probability must lie in [0, 1]");
    BoundResult r;
    if (scalar_interval(s)) {
      r = zzb_scalar_independent(s.prior.width(0), [v = *v](double) { return v; });
    } else {
      r = vector_bound(s, v);
    }
    r.method = "pe_stub_" + r.method;
    return r;
  }
  if (method == "closed_form") return closed_form_bound(s, false);
  if (method == "asymptotic") return closed_form_bound(s, true);
  if (method == "symmetric") return symmetric_bound(s);
  if (method == "general") return general_bound(s);
  if (method == "vector") return vector_bound(s, std::nullopt);
  if (method != "auto") {
    throw ConfigError("/bound/method",
                      "unknown method '" + method + "' (auto, closed_form, asymptotic, symmetric, general, vector, pe_stub)");
  }

  if (!scalar_interval(s)) return vector_bound(s, std::nullopt);
  const NoiseLaw& law = s.truth.noise();
  const bool same_map = s.assumed.signal().same_linear_map(s.truth.signal());
  if (same_map && (law.as_gaussian() || law.as_sample_mixture())) {
    if (s.assumed.noise_mean() == pooled_or_gaussian(law).mean) return closed_form_bound(s, false);
    if (law.as_gaussian()) return symmetric_bound(s);
  }
  return general_bound(s);
}

std::string bound_output(const BoundResult& r, double runtime, const std::string& format) {
  if (format == "json") {
    json j = {{"method", r.method}, {"value", r.value}, {"converged", r.converged}, {"runtime_s", runtime}};
    return j.dump(2) + "\n";
  }
  return csv_line({"method", "value", "converged", "runtime_s"}) +
         csv_line({r.method, format_number(r.value), r.converged ? "true" : "false", format_number(runtime)});
}

// --- mc ------------------------------------------------------------------------

EstimatorSpec estimator_from(const Scenario& s) {
  const std::string kind = get_string(s.mc, "/mc", "estimator", s.assumed.signal().is_linear() ? "linear_closed_form" : "quasi_mle");
  if (kind == "linear_closed_form") {
    if (!s.assumed.signal().is_linear()) throw ConfigError("/mc/estimator", "closed form needs a linear signal map");
    return LinearClosedForm{s.assumed};
  }
  if (kind == "quasi_mle") {
    SearchPolicy policy;
    if (auto g = get_count(s.mc, "/mc", "grid_points")) policy.grid_points = *g;
    return QuasiMle{s.assumed, policy};
  }
  if (kind == "sample_median") return SampleMedian{s.assumed.signal(), 0.0};
  if (kind == "mixture_mle") {
    const auto* m = s.truth.noise().as_sample_mixture();
    if (!m) throw ConfigError("/mc/estimator", "mixture_mle needs sample_mixture true noise");
    return MixtureMle{m->weights, m->means, m->variances};
  }
  throw ConfigError("/mc/estimator", "unknown estimator '" + kind + "' (linear_closed_form, quasi_mle, sample_median, mixture_mle)");
}

std::string mc_output(const MseReport& r, const std::string& format) {
  if (format == "json") {
    json rows = json::array();
    for (Eigen::Index i = 0; i < r.mse.size(); ++i) {
      rows.push_back({{"coordinate", i}, {"mse", r.mse[i]}, {"stderr", r.std_error[i]}, {"bias", r.bias[i]}});
    }
    json j = {{"coordinates", rows}, {"trials_used", r.trials_used}, {"failures", r.failures}, {"valid", r.valid}};
    return j.dump(2) + "\n";
  }
  std::string out = csv_line({"coordinate", "mse", "stderr", "bias", "trials_used", "failures", "valid"});
  for (Eigen::Index i = 0; i < r.mse.size(); ++i) {
    out += csv_line({std::to_string(i), format_number(r.mse[i]), format_number(r.std_error[i]), format_number(r.bias[i]),
                     std::to_string(r.trials_used), std::to_string(r.failures), r.valid ? "true" : "false"});
  }
  return out;
}

// --- pe ------------------------------------------------------------------------

std::string pe_output(const std::string& method, const PeEstimate& e, const std::string& format) {
  if (format == "json") {
    json j = {{"method", method}, {"pe", e.pe}, {"stderr", e.std_error}, {"trials", e.trials}};
    return j.dump(2) + "\n";
  }
  return csv_line({"method", "pe", "stderr", "trials"}) +
         csv_line({method, format_number(e.pe), format_number(e.std_error), std::to_string(e.trials)});
}

// --- sweep ---------------------------------------------------------------------

std::string sweep_output(const std::vector<SweepRow>& rows, const std::string& format) {
  if (format == "json") {
    json arr = json::array();
    for (const auto& r : rows) {
      arr.push_back({{"sweep_var", r.sweep_var},
                     {"sweep_value", r.sweep_value},
                     {"quantity", r.quantity},
                     {"method", r.method},
                     {"value", std::isfinite(r.value) ? json(r.value) : json(nullptr)},
                     {"stderr", std::isfinite(r.std_error) ? json(r.std_error) : json(nullptr)},
                     {"flag", r.flag}});
    }
    return arr.dump(2) + "\n";
  }
  std::string out = csv_line({"sweep_var", "sweep_value", "quantity", "method", "value", "stderr", "flag"});
  for (const auto& r : rows) {
    out += csv_line({r.sweep_var, format_number(r.sweep_value), r.quantity, r.method, format_number(r.value),
                     format_number(r.std_error), r.flag});
  }
  return out;
}

std::string execute(const Options& o) {
  const json config = load_config_file(o.config);
  if (o.command == "sweep") {
    if (!is_sweep_config(config)) throw ConfigError("/example", "sweep config needs an 'example' field");
    SweepConfig c = sweep_from_json(config);
    if (o.seed) c.seed = *o.seed;
    if (o.trials) c.trials = *o.trials;
    return sweep_output(run_sweep(c), o.format);
  }
  if (is_sweep_config(config)) throw ConfigError("/example", "'" + o.command + "' expects a scenario config, not a sweep");
  const Scenario s = scenario_from_json(config);

  if (o.command == "bound") {
    const auto t0 = std::chrono::steady_clock::now();
    const BoundResult r = compute_bound(s);
    const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!std::isfinite(r.value)) throw DomainError("bound evaluated to a non-finite value");
    return bound_output(r, runtime, o.format);
  }

  const std::size_t n = s.prior.dim();
  if (o.command == "mc") {
    const std::uint64_t seed = o.seed.value_or(get_count(s.mc, "/mc", "seed").value_or(1));
    const std::size_t trials = o.trials.value_or(get_count(s.mc, "/mc", "trials").value_or(1000));
    if (trials == 0) throw ConfigError("/mc/trials", "trials must be positive");
    TrialPlan plan{s.truth, s.prior, get_vector(s.mc, "/mc", "theta", n), estimator_from(s), trials, seed, 0};
    return mc_output(run_mse(plan), o.format);
  }

  // pe
  const Vec theta_o = get_vector(s.pe, "/pe", "theta_o", n).value_or(Vec::Zero(static_cast<Eigen::Index>(n)));
  const auto delta = get_vector(s.pe, "/pe", "delta", n);
  if (!delta) throw ConfigError("/pe/delta", "missing required field");
  const std::string method = get_string(s.pe, "/pe", "method", "analytic");
  const std::uint64_t seed = o.seed.value_or(get_count(s.pe, "/pe", "seed").value_or(1));
  const std::size_t trials = o.trials.value_or(get_count(s.pe, "/pe", "trials").value_or(100000));
  if (trials == 0) throw ConfigError("/pe/trials", "trials must be positive");
  const PeKernel kernel(s.assumed, s.truth);
  if (method == "analytic") {
    try {
      return pe_output(method, PeEstimate{pe_analytic(kernel, theta_o, *delta), 0.0, 0}, o.format);
    } catch (const UnsupportedVariant& e) {
      throw ConfigError("/pe/method", e.what());
    }
  }
  if (method == "projected_mc") return pe_output(method, pe_general_mc(kernel, theta_o, *delta, trials, seed), o.format);
  if (method == "empirical") return pe_output(method, empirical_pe(kernel, theta_o, *delta, trials, seed), o.format);
  throw ConfigError("/pe/method", "unknown method '" + method + "' (analytic, projected_mc, empirical)");
}

}  // namespace

void write_atomically(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw std::runtime_error("failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot move output into place: " + ec.message());
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& err) {
  CLI::App app{"Ziv-Zakai bounds under model misspecification"};
  app.require_subcommand(1);
  Options o;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  const std::pair<const char*, const char*> commands[] = {
      {"bound", "Ziv-Zakai bound of a scenario"},
      {"mc", "Monte Carlo MSE of an estimator"},
      {"pe", "Pairwise error probability of the mismatched detector"},
      {"sweep", "Bounds and MC MSE over a parameter grid of a worked example"}};
  for (const auto& [name, about] : commands) {
    CLI::App* sub = app.add_subcommand(name, about);
    sub->add_option("--config", o.config, "Scenario or sweep JSON")->required();
    sub->add_option("--out", o.out, "Output file")->required();
    sub->add_option("--seed", seed, "Seed override");
    sub->add_option("--trials", trials, "Trial count override")->check(CLI::PositiveNumber);
    sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->callback([&o, name] { o.command = name; });
  }

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success&) {
    err << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitConfig;
  }
  for (CLI::App* sub : app.get_subcommands()) {
    if (sub->count("--seed")) o.seed = seed;
    if (sub->count("--trials")) o.trials = trials;
  }

  try {
    write_atomically(o.out, execute(o));
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error at " << e.field() << ": " << e.what() << "\n";
    return kExitConfig;
  } catch (const ModelError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const UnsupportedVariant& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  }
}

}  // namespace mzzb
