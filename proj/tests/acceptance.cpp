// Acceptance suite. `mzzb_acceptance N` checks criterion N and prints one
// line "criterion N: PASS|FAIL <title> | <detail>"; without arguments every
// criterion runs in turn. The exit status is nonzero when any check fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mzzb/cli.hpp"
#include "mzzb/csv.hpp"
#include "mzzb/error.hpp"
#include "mzzb/estimators.hpp"
#include "mzzb/experiments.hpp"
#include "mzzb/montecarlo.hpp"
#include "mzzb/pe_kernel.hpp"
#include "mzzb/special_math.hpp"
#include "mzzb/zzb.hpp"

using namespace mzzb;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Clock {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string num(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

/// Accumulates failed sub-checks; the first few are kept for the report line.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    ++total_;
    if (ok) return;
    ++failed_;
    if (failures_.size() < 4) failures_.push_back(what);
  }
  Outcome outcome(const std::string& summary) const {
    Outcome o;
    o.pass = failed_ == 0;
    o.detail = summary;
    if (failed_ > 0) {
      o.detail += "; " + std::to_string(failed_) + "/" + std::to_string(total_) + " checks failed:";
      for (const auto& f : failures_) o.detail += " [" + f + "]";
    }
    return o;
  }

 private:
  std::size_t total_ = 0;
  std::size_t failed_ = 0;
  std::vector<std::string> failures_;
};

// --- CLI plumbing ------------------------------------------------------------------

fs::path work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("mzzb_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void set_workers(std::size_t n) { ::setenv("MZZB_WORKERS", std::to_string(n).c_str(), 1); }

/// Runs the CLI on an inline config and returns the output file contents.
std::string cli(const std::string& command, const std::string& name, const std::string& config) {
  const fs::path cfg = work_dir() / (name + ".json");
  const fs::path out = work_dir() / (name + ".csv");
  write_file(cfg, config);
  std::ostringstream err;
  const int code = run_cli({"mzzb", command, "--config", cfg.string(), "--out", out.string()}, err);
  if (code != 0) throw std::runtime_error("mzzb " + command + " exited with " + std::to_string(code) + ": " + err.str());
  return read_file(out);
}

struct Row {
  double x;
  std::string quantity;
  std::string method;
  double value;
  double se;
  std::string flag;
};

std::vector<Row> parse_sweep(const std::string& csv) {
  std::vector<Row> rows;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  if (line != "sweep_var,sweep_value,quantity,method,value,stderr,flag") throw std::runtime_error("bad sweep header");
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 7) throw std::runtime_error("bad sweep row: " + line);
    rows.push_back(Row{std::stod(f[1]), f[2], f[3], std::stod(f[4]), std::stod(f[5]), f[6]});
  }
  return rows;
}

/// Quantity -> sweep value -> row.
using Table = std::map<std::string, std::map<double, Row>>;

Table tabulate(const std::vector<Row>& rows) {
  Table t;
  for (const Row& r : rows) t[r.quantity][r.x] = r;
  return t;
}

const std::string kSweep1 = R"({"example": 1, "K": 500, "trials": 2000, "seed": 1})";
const std::string kSweep2 = R"({"example": 2, "K": 500, "trials": 2000, "seed": 2})";
const std::string kSweep3 = R"({"example": 3, "K": 2000, "trials": 1000, "seed": 3})";
const std::string kSweep4 = R"({"example": 4, "K": 5000, "trials": 500, "seed": 4})";

// --- criterion 1 -------------------------------------------------------------------

Outcome criterion1() {
  Clock clock;
  Checks c;
  double worst = 0.0;
  for (double g : {0.1, 1.0, 10.0}) {
    for (double T : {1.0, 10.0, 100.0}) {
      const double closed = zzb_closed_form_q_linear(g, T);
      const double quad = zzb_scalar_independent(T, [g](double h) { return q_function(g * h); }).value;
      const double rel = std::abs(closed - quad) / quad;
      worst = std::max(worst, rel);
      c.expect(rel <= 1e-6, "gamma=" + num(g) + " T=" + num(T) + " rel=" + num(rel, 3));
    }
  }
  const double t = clock.seconds();
  c.expect(t < 5.0, "runtime " + num(t, 3) + " s");
  return c.outcome("max rel diff " + num(worst, 3) + ", " + num(t, 3) + " s");
}

// --- criterion 2 -------------------------------------------------------------------

Outcome criterion2() {
  Checks c;
  double worst = 0.0;
  std::string worst_at;
  for (double g : {0.1, 1.0, 10.0}) {
    for (double tg : {50.0, 100.0, 1e3, 1e4, 1e5, 1e6, 1e7}) {
      const double T = tg / g;
      const double asym = 1.0 / (4.0 * g * g);
      const double rel = std::abs(zzb_closed_form_q_linear(g, T) - asym) / asym;
      if (rel > worst) {
        worst = rel;
        worst_at = "gamma=" + num(g) + " T*gamma=" + num(tg);
      }
      c.expect(rel <= 1e-6, "gamma=" + num(g) + " T*gamma=" + num(tg) + " rel=" + num(rel, 3));
    }
  }
  return c.outcome("max rel deviation " + num(worst, 3) + " at " + worst_at);
}

// --- criterion 3 -------------------------------------------------------------------

Mat random_spd(Rng& rng, Eigen::Index K) {
  Mat a(K, K);
  for (Eigen::Index i = 0; i < K; ++i) {
    for (Eigen::Index j = 0; j < K; ++j) a(i, j) = rng.normal();
  }
  return a * a.transpose() / static_cast<double>(K) + 0.3 * Mat::Identity(K, K);
}

Mat random_matrix(Rng& rng, Eigen::Index K, Eigen::Index n) {
  Mat h(K, n);
  for (Eigen::Index i = 0; i < K; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) h(i, j) = rng.uniform(-1.5, 1.5);
  }
  return h;
}

Vec random_vec(Rng& rng, Eigen::Index K, double scale) {
  Vec v(K);
  for (auto& x : v) x = scale * rng.normal();
  return v;
}

struct PeCase {
  std::string variant;
  double analytic;
  PeEstimate mc;
};

/// 20 random scenarios per noise variant; K <= 8. The offset is scaled so the
/// assumed-model detection SNR lies in [0.3, 1.5], keeping Pe away from 0.
std::vector<PeCase> pe_cases(std::size_t workers) {
  std::vector<PeCase> out;
  Rng rng(20240601);
  const std::size_t trials = 100000;
  for (const std::string variant : {"gaussian", "mixture", "equal_linear"}) {
    for (int s = 0; s < 20; ++s) {
      const auto K = static_cast<Eigen::Index>(2 + rng.below(7));
      const auto n = static_cast<Eigen::Index>(1 + rng.below(2));
      const Mat H = random_matrix(rng, K, n);
      const Mat Hs = variant == "equal_linear" ? H : Mat(H + 0.3 * random_matrix(rng, K, n));
      const Covariance sigma = Covariance::dense(random_spd(rng, K));
      const Vec mu = random_vec(rng, K, 0.3);
      NoiseLaw law = NoiseLaw::gaussian(random_vec(rng, K, 0.3), Covariance::dense(random_spd(rng, K)));
      if (variant == "mixture") {
        const std::size_t L = 2 + rng.below(2);
        std::vector<double> w(L);
        double sum = 0.0;
        for (auto& x : w) sum += (x = rng.uniform(0.2, 1.0));
        for (auto& x : w) x /= sum;
        w.back() = 1.0;
        for (std::size_t i = 0; i + 1 < L; ++i) w.back() -= w[i];
        std::vector<GaussianLaw> comps;
        for (std::size_t i = 0; i < L; ++i) {
          comps.push_back(GaussianLaw{random_vec(rng, K, 0.5), Covariance::dense(rng.uniform(0.3, 3.0) * random_spd(rng, K))});
        }
        law = NoiseLaw::mixture(w, comps);
      }
      const PeKernel kernel(AssumedModel(SignalMap::linear_matrix(H), mu, sigma),
                            TrueModel(SignalMap::linear_matrix(Hs), law));
      const Vec theta_o = random_vec(rng, n, 1.0);
      Vec dir = random_vec(rng, n, 1.0);
      const Vec v = H * dir;
      dir *= 2.0 * rng.uniform(0.3, 1.5) / std::sqrt(sigma.inv_quad(v, v));
      double analytic;
      if (variant == "gaussian") {
        analytic = pe_gaussian(kernel, theta_o, dir);
      } else if (variant == "mixture") {
        analytic = pe_mixture(kernel, theta_o, dir);
      } else {
        analytic = pe_equal_linear(kernel, dir);
      }
      out.push_back(PeCase{variant, analytic, empirical_pe(kernel, theta_o, dir, trials, rng.next(), workers)});
    }
  }
  return out;
}

std::string pe_cases_csv(const std::vector<PeCase>& cases) {
  std::string out = csv_line({"variant", "analytic", "empirical", "stderr"});
  for (const auto& c : cases) {
    out += csv_line({c.variant, format_number(c.analytic), format_number(c.mc.pe), format_number(c.mc.std_error)});
  }
  return out;
}

Outcome criterion3() {
  Clock clock;
  Checks c;
  const auto cases = pe_cases(0);
  std::map<std::string, int> within;
  for (const auto& pc : cases) within[pc.variant] += std::abs(pc.mc.pe - pc.analytic) <= 3.0 * pc.mc.std_error ? 1 : 0;
  std::string summary;
  for (const auto& [variant, count] : within) {
    c.expect(count >= 19, variant + " " + std::to_string(count) + "/20");
    summary += variant + " " + std::to_string(count) + "/20, ";
  }
  const double t = clock.seconds();
  c.expect(t < 120.0, "runtime " + num(t, 3) + " s");
  return c.outcome(summary + num(t, 3) + " s");
}

// --- criterion 4 -------------------------------------------------------------------

/// Full-match scalar scenario; T is long enough that T * gamma >= 1e6.
const std::string kClassical = R"({
  "assumed": {"signal": {"linear_vector": [1.0, 0.5, -0.8, 1.2, 0.3, -1.1, 0.9, 0.6]},
              "mu": 0.2, "sigma": {"diagonal": [1.0, 0.5, 2.0, 1.5, 0.8, 1.2, 0.7, 2.5]}},
  "true": {"noise": {"gaussian": {"mean": 0.2, "cov": {"diagonal": [1.0, 0.5, 2.0, 1.5, 0.8, 1.2, 0.7, 2.5]}}}},
  "prior": {"uniform_interval": 1000000.0},
  "mc": {"estimator": "linear_closed_form", "theta": [4.0], "trials": 10000, "seed": 44}
})";

Outcome criterion4() {
  Checks c;
  const Vec h = (Vec(8) << 1.0, 0.5, -0.8, 1.2, 0.3, -1.1, 0.9, 0.6).finished();
  const Vec d = (Vec(8) << 1.0, 0.5, 2.0, 1.5, 0.8, 1.2, 0.7, 2.5).finished();
  const double crb = 1.0 / h.cwiseQuotient(d).dot(h);

  const std::string bound_csv = cli("bound", "c4_bound", kClassical);
  const double zzb = std::stod(bound_csv.substr(bound_csv.find('\n') + 1).substr(bound_csv.substr(bound_csv.find('\n') + 1).find(',') + 1));
  const double rel_b = std::abs(zzb - crb) / crb;
  c.expect(rel_b <= 1e-5, "bound rel " + num(rel_b, 3));

  const std::string mc_csv = cli("mc", "c4_mc", kClassical);
  std::istringstream in(mc_csv);
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  const double mse = std::stod(line.substr(line.find(',') + 1));
  const double rel_m = std::abs(mse - crb) / crb;
  c.expect(rel_m <= 0.05, "MC rel " + num(rel_m, 3));
  return c.outcome("1/(h'S*^-1 h) = " + num(crb, 8) + ", ZZB " + num(zzb, 8) + " (rel " + num(rel_b, 2) + "), MC MSE " +
                   num(mse, 6) + " (rel " + num(rel_m, 2) + ")");
}

// --- criterion 5 -------------------------------------------------------------------

Outcome criterion5() {
  Checks c;
  const std::size_t K = 16;
  Vec hv(K);
  for (std::size_t k = 0; k < K; ++k) hv[static_cast<Eigen::Index>(k)] = std::sin(0.7 * static_cast<double>(k)) + 1.3;
  const SignalMap h = SignalMap::linear_vector(hv);
  const double sigma_star2 = 0.45;
  const Vec mu = Vec::Constant(static_cast<Eigen::Index>(K), 0.8);
  const TrueModel truth(h, NoiseLaw::gaussian(mu, Covariance::scaled_identity(K, sigma_star2)));
  double spread = 0.0;
  for (double delta : {-2.0, -0.3, 0.05, 0.7, 3.0}) {
    std::vector<double> args;
    for (double s2 : {0.01, 1.0, 100.0}) {
      const PeKernel k(AssumedModel(h, mu, Covariance::scaled_identity(K, s2)), truth);
      const EqualLinearTerms t = equal_linear_terms(k, Vec::Constant(1, delta));
      args.push_back(t.z_plus / t.sigma);
    }
    const auto [lo, hi] = std::minmax_element(args.begin(), args.end());
    spread = std::max(spread, *hi - *lo);
    c.expect(*hi - *lo <= 1e-12, "delta=" + num(delta) + " spread " + num(*hi - *lo, 3));
  }
  return c.outcome("max spread of the Q argument across sigma^2 " + num(spread, 3));
}

// --- criterion 6 -------------------------------------------------------------------

Outcome criterion6() {
  Clock clock;
  Checks c;
  const Table t = tabulate(parse_sweep(cli("sweep", "c6", kSweep1)));
  std::size_t points = 0;
  for (const auto& [x, matched] : t.at("zzb_matched")) {
    ++points;
    for (const std::string m : {"m1", "m2", "matched"}) {
      const Row& b = t.at("zzb_" + m).at(x);
      const Row& e = t.at("mse_mle_" + m).at(x);
      if (b.flag == "undefined") continue;
      c.expect(e.flag == "ok", m + " MC invalid at " + num(x));
      c.expect(e.value >= b.value - 3.0 * e.se,
               m + " at s2=" + num(x) + ": mse " + num(e.value) + " < zzb " + num(b.value) + " - 3se");
    }
    const double m1 = t.at("zzb_m1").at(x).value;
    const double m2 = t.at("zzb_m2").at(x).value;
    const double lim = std::isnan(m1) ? m2 : std::min(m1, m2);
    c.expect(matched.value <= lim, "matched > min(M1, M2) at s2=" + num(x));
  }
  const Example1 zero = build_example1(0.0);
  const double T = zero.T;
  const bool exact = zero.gamma_m2 == zero.gamma_matched &&
                     zzb_closed_form_q_linear(zero.gamma_m2, T) == zzb_closed_form_q_linear(zero.gamma_matched, T) &&
                     zzb_asymptotic_q_linear(zero.gamma_m2) == zzb_asymptotic_q_linear(zero.gamma_matched);
  c.expect(exact, "M2 != matched at sigma2 = 0");
  const double s = clock.seconds();
  c.expect(s < 180.0, "runtime " + num(s, 3) + " s");
  return c.outcome(std::to_string(points) + " sigma^2 points, M2 = matched at 0: " + (exact ? "exact" : "no") + ", " +
                   num(s, 3) + " s");
}

// --- criterion 7 -------------------------------------------------------------------

Outcome criterion7() {
  Clock clock;
  Checks c;
  const Table t = tabulate(parse_sweep(cli("sweep", "c7", kSweep2)));
  const auto& zzb = t.at("zzb");
  double asym = 0.0;
  for (const auto& [x, r] : zzb) {
    const auto mirror = zzb.find(10.0 - x);
    if (mirror == zzb.end()) continue;
    const double rel = std::abs(r.value - mirror->second.value) / r.value;
    asym = std::max(asym, rel);
    c.expect(rel <= 1e-8, "asymmetry " + num(rel, 3) + " at mu*=" + num(x));
  }
  const auto best = std::min_element(zzb.begin(), zzb.end(), [](const auto& a, const auto& b) { return a.second.value < b.second.value; });
  c.expect(best->first == 5.0, "minimum at mu*=" + num(best->first));
  const double matched = t.at("zzb_matched").at(5.0).value;
  c.expect(zzb.at(5.0).value == matched, "bound at mu*=5 differs from matched");
  for (const auto& [x, e] : t.at("mse_mle")) {
    c.expect(e.flag == "ok", "MC invalid at " + num(x));
    c.expect(e.value >= zzb.at(x).value - 3.0 * e.se, "mse below bound at mu*=" + num(x));
  }
  const double ratio = t.at("mse_mle").at(0.0).value / matched;
  c.expect(ratio > 10.0, "MSE(0)/matched = " + num(ratio));
  const double s = clock.seconds();
  c.expect(s < 120.0, "runtime " + num(s, 3) + " s");
  return c.outcome("max asymmetry " + num(asym, 3) + ", MSE(mu*=0)/matched " + num(ratio, 4) + ", " + num(s, 3) + " s");
}

// --- criterion 8 -------------------------------------------------------------------

Outcome criterion8() {
  Clock clock;
  Checks c;
  const Table t = tabulate(parse_sweep(cli("sweep", "c8", kSweep3)));
  std::size_t wins = 0;
  std::size_t interior = 0;
  for (const auto& [x, mis] : t.at("zzb_mismatched")) {
    const double mat = t.at("zzb_matched").at(x).value;
    const bool extreme = std::abs(x) < 1e-12 || std::abs(x - 1.0) < 1e-12;
    if (extreme) {
      c.expect(std::abs(mis.value - mat) <= 1e-10 * mat, "extremes differ at 1-w1=" + num(x));
    } else {
      c.expect(mis.value >= mat, "mismatched < matched at 1-w1=" + num(x));
    }
    if (x > 0.1 - 1e-9 && x < 0.9 + 1e-9) {
      ++interior;
      const Row& med = t.at("mse_median").at(x);
      const Row& qm = t.at("mse_qmle").at(x);
      const bool win = med.value < qm.value;
      wins += win;
      c.expect(win, "median " + num(med.value) + " >= qmle " + num(qm.value) + " at 1-w1=" + num(x));
    }
  }
  const double s = clock.seconds();
  c.expect(s < 180.0, "runtime " + num(s, 3) + " s");
  return c.outcome("median beats quasi-MLE at " + std::to_string(wins) + "/" + std::to_string(interior) +
                   " interior points, " + num(s, 3) + " s");
}

// --- criterion 9 -------------------------------------------------------------------

Outcome criterion9() {
  Clock clock;
  Checks c;
  const Table t = tabulate(parse_sweep(cli("sweep", "c9", kSweep4)));
  std::string summary;
  for (const std::string est : {"qmle", "mle"}) {
    const auto& tau = t.at("mse_tau_" + est);
    const double ratio = tau.begin()->second.value / tau.rbegin()->second.value;
    c.expect(ratio > 100.0, "tau " + est + " low/high SNR MSE ratio " + num(ratio));
    summary += "tau " + est + " ratio " + num(ratio, 4) + ", ";
  }
  const auto& mis = t.at("zzb_tau_mismatched");
  const auto& mat = t.at("zzb_tau_matched");
  for (auto it = std::prev(mis.end(), 2); it != mis.end(); ++it) {
    c.expect(it->second.value >= mat.at(it->first).value,
             "tau bound mismatched " + num(it->second.value) + " < matched " + num(mat.at(it->first).value) + " at " +
                 num(it->first) + " dB");
  }
  for (const auto& [est, bound] : {std::pair<std::string, std::string>{"qmle", "mismatched"}, {"mle", "matched"}}) {
    const auto& mse = t.at("mse_alpha_" + est);
    const Row* prev = nullptr;
    for (const auto& [x, e] : mse) {
      const double b = t.at("zzb_alpha_" + bound).at(x).value;
      c.expect(e.flag == "ok", "alpha " + est + " MC invalid at " + num(x) + " dB");
      c.expect(e.value >= b - 3.0 * e.se, "alpha " + est + " mse " + num(e.value) + " < zzb " + num(b) + " - 3se at " +
                                              num(x) + " dB");
      if (prev) {
        c.expect(e.value <= prev->value + 3.0 * std::hypot(e.se, prev->se),
                 "alpha " + est + " MSE rises from " + num(prev->x) + " to " + num(x) + " dB");
      }
      prev = &e;
    }
  }
  for (const auto& [q, rows] : t) {
    for (const auto& [x, r] : rows) c.expect(r.flag == "ok", q + " flagged " + r.flag + " at " + num(x) + " dB");
  }
  const double s = clock.seconds();
  c.expect(s < 600.0, "runtime " + num(s, 3) + " s");
  return c.outcome(summary + num(s, 4) + " s");
}

// --- criterion 10 ------------------------------------------------------------------

Outcome criterion10() {
  Checks c;
  std::string summary;
  auto compare = [&](const std::string& name, const std::function<std::string()>& produce) {
    set_workers(1);
    const std::string a = produce();
    set_workers(4);
    const std::string b = produce();
    const bool same = a == b;
    c.expect(same, name + " differs between 1 and 4 workers");
    summary += name + (same ? " identical" : " DIFFERS") + " (" + std::to_string(a.size()) + " B), ";
  };
  compare("pe oracle table", [] { return pe_cases_csv(pe_cases(0)); });
  compare("classical mc", [] { return cli("mc", "c10_mc", kClassical); });
  compare("example 1 sweep", [] { return cli("sweep", "c10_s1", kSweep1); });
  compare("example 2 sweep", [] { return cli("sweep", "c10_s2", kSweep2); });
  compare("example 3 sweep", [] { return cli("sweep", "c10_s3", kSweep3); });
  compare("example 4 sweep", [] { return cli("sweep", "c10_s4", kSweep4); });
  return c.outcome(summary.substr(0, summary.size() - 2));
}

struct Criterion {
  const char* title;
  Outcome (*run)();
};

const Criterion kCriteria[] = {
    {"closed form equals quadrature on the 9-point grid", criterion1},
    {"closed form equals 1/(4 gamma^2) for T gamma >= 50", criterion2},
    {"analytic Pe matches empirical Pe on random scenarios", criterion3},
    {"classical recovery of 1/(h' S*^-1 h)", criterion4},
    {"i.i.d. variance mismatch leaves the Q argument unchanged", criterion5},
    {"example 1 covariance mismatch sweep", criterion6},
    {"example 2 mean mismatch sweep", criterion7},
    {"example 3 outlier sweep", criterion8},
    {"example 4 delay and amplitude sweep", criterion9},
    {"MC outputs identical across worker counts", criterion10},
};

bool run_one(int n) {
  const Criterion& cr = kCriteria[n - 1];
  Outcome o;
  try {
    o = cr.run();
  } catch (const std::exception& e) {
    o = Outcome{false, std::string("exception: ") + e.what()};
  }
  std::cout << "criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << " " << cr.title << " | " << o.detail << std::endl;
  return o.pass;
}

}  // namespace

int main(int argc, char** argv) {
  constexpr int count = static_cast<int>(std::size(kCriteria));
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) {
    const int n = std::atoi(argv[i]);
    if (n < 1 || n > count) {
      std::cerr << "usage: mzzb_acceptance [1-" << count << "]...\n";
      return 2;
    }
    which.push_back(n);
  }
  if (which.empty()) {
    for (int n = 1; n <= count; ++n) which.push_back(n);
  }
  bool all = true;
  for (int n : which) all = run_one(n) && all;
  fs::remove_all(work_dir());
  return all ? 0 : 1;
}
