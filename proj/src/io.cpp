#include "lorentz/io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "lorentz/corridors.hpp"
#include "lorentz/errors.hpp"

namespace lorentz::io {

namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

const std::set<std::string> &extra_keys() {
  static const std::set<std::string> k{"xi", "N", "M_grid", "stratified", "a",
                                       "totient_n", "steps", "H_grid", "p"};
  return k;
}

template <typename T>
T get_as(const json &j, const std::string &key, const char *expected) {
  try {
    return j.get<T>();
  } catch (const json::exception &) {
    throw InvalidConfig(key, std::string("expected ") + expected);
  }
}

// Accepts integers and integral floats such as 1e6.
std::uint64_t get_count(const json &j, const std::string &key) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return j.get<std::uint64_t>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (v >= 0 && v < 1.8e19 && std::floor(v) == v) return static_cast<std::uint64_t>(v);
  }
  throw InvalidConfig(key, "expected a non-negative integer");
}

IVec2 get_ivec(const json &j, const std::string &key) {
  const auto v = get_as<std::vector<std::int64_t>>(j, key, "a pair of integers");
  if (v.size() != 2) throw InvalidConfig(key, "expected a pair of integers");
  return {v[0], v[1]};
}

json ivec(const IVec2 &v) { return json::array({v.x, v.y}); }
json vec(const Vec2 &v) { return json::array({v.x, v.y}); }
json mat(const Matrix2 &m) {
  return json::array({json::array({m[0][0], m[0][1]}), json::array({m[1][0], m[1][1]})});
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string num(double v) { return format_double(v); }
std::string num(std::int64_t v) { return std::to_string(v); }
std::string num(std::uint64_t v) { return std::to_string(v); }
std::string num(int v) { return std::to_string(v); }

json envelope(const RunPlan &plan, std::uint64_t hash, json result) {
  return json{{"schema_version", kSchemaVersion},
              {"kind", plan.experiment},
              {"version", kVersion},
              {"config", config_echo(plan)},
              {"config_hash", hex(hash)},
              {"result", std::move(result)}};
}

std::string dump(const json &j) { return j.dump(2) + "\n"; }

std::string iso_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Histogram of samples on [lo, hi) with `bins` equal bins.
json histogram(const std::vector<double> &v, double lo, double hi, int bins) {
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(bins), 0);
  std::uint64_t below = 0, above = 0;
  const double w = (hi - lo) / bins;
  for (double x : v) {
    if (x < lo) {
      ++below;
    } else if (x >= hi) {
      ++above;
    } else {
      const auto k = std::min<std::size_t>(static_cast<std::size_t>((x - lo) / w), counts.size() - 1);
      ++counts[k];
    }
  }
  return json{{"lo", lo}, {"hi", hi}, {"counts", counts}, {"below", below}, {"above", above}};
}

// ---- per-experiment rendering ----

std::vector<Artifact> render_corridors(const RunPlan &plan) {
  const CorridorSet set = enumerate_corridors(plan.config.sigma);
  Table pairs{{"p", "q", "p_prime", "q_prime", "width"}, {}};
  Table dirs{{"p", "q", "width"}, {}};
  json entries = json::array();
  for (std::size_t i = 0; i < set.entries.size(); ++i) {
    const auto &e = set.entries[i];
    pairs.rows.push_back(
        {num(e.xi.x), num(e.xi.y), num(e.xi_prime.x), num(e.xi_prime.y), num(e.width)});
    if (i % 2 == 0) dirs.rows.push_back({num(e.xi.x), num(e.xi.y), num(e.width)});
    entries.push_back({{"xi", ivec(e.xi)}, {"xi_prime", ivec(e.xi_prime)}, {"width", e.width}});
  }
  json result{{"sigma", set.sigma},
              {"direction_count", set.directions()},
              {"pair_count", set.entries.size()},
              {"pairs", entries}};
  return {{"corridors.json", dump(envelope(plan, config_hash(plan.config), result))},
          {"corridors.csv", to_csv(pairs)},
          {"corridor_directions.csv", to_csv(dirs)}};
}

std::vector<Artifact> render_cellmeasure(const RunPlan &plan) {
  const auto r = cell_measure_experiment(plan.config, get_ivec(plan.params["xi"], "xi"),
                                         plan.params["N"].get<std::int64_t>(),
                                         plan.params["stratified"].get<bool>());
  json result{{"xi", ivec(r.xi)},           {"N", r.N},
              {"kappa", ivec(r.kappa)},     {"sigma", r.sigma},
              {"samples", r.samples},       {"stratified", r.stratified},
              {"leading", r.leading},       {"regime", r.regime},
              {"estimate", r.estimate},     {"se", r.se},
              {"ratio", r.ratio}};
  Table t{{"xi_x", "xi_y", "N", "kappa_x", "kappa_y", "sigma", "samples", "stratified", "leading",
           "regime", "estimate", "se", "ratio"},
          {{num(r.xi.x), num(r.xi.y), num(r.N), num(r.kappa.x), num(r.kappa.y), num(r.sigma),
            num(r.samples), r.stratified ? "true" : "false", num(r.leading), r.regime,
            num(r.estimate), num(r.se), num(r.ratio)}}};
  return {{"cellmeasure.json", dump(envelope(plan, r.config_hash, result))},
          {"cellmeasure.csv", to_csv(t)}};
}

std::vector<Artifact> render_angles(const RunPlan &plan) {
  const IVec2 xi = get_ivec(plan.params["xi"], "xi");
  Table t{{"M", "theta_minus_xi", "theta_kappa", "phi_prime_kappa", "theta_gap",
           "theta_gap_predicted", "theta_rel_error", "phi_gap", "phi_gap_predicted",
           "phi_rel_error"},
          {}};
  json rows = json::array();
  for (const auto &m : plan.params["M_grid"]) {
    const std::int64_t M = m.get<std::int64_t>();
    const auto a = singularity_angles(xi, M, plan.config.sigma);
    const double te = std::abs(a.theta_gap / a.theta_gap_predicted - 1);
    const double pe = std::abs(a.phi_gap / a.phi_gap_predicted - 1);
    t.rows.push_back({num(M), num(a.theta_minus_xi), num(a.theta_kappa), num(a.phi_prime_kappa),
                      num(a.theta_gap), num(a.theta_gap_predicted), num(te), num(a.phi_gap),
                      num(a.phi_gap_predicted), num(pe)});
    rows.push_back({{"M", M},
                    {"theta_minus_xi", a.theta_minus_xi},
                    {"theta_kappa", a.theta_kappa},
                    {"phi_prime_kappa", a.phi_prime_kappa},
                    {"theta_gap", a.theta_gap},
                    {"theta_gap_predicted", a.theta_gap_predicted},
                    {"theta_rel_error", te},
                    {"phi_gap", a.phi_gap},
                    {"phi_gap_predicted", a.phi_gap_predicted},
                    {"phi_rel_error", pe}});
  }
  json result{{"xi", ivec(xi)}, {"sigma", plan.config.sigma}, {"rows", rows}};
  return {{"angles.json", dump(envelope(plan, config_hash(plan.config), result))},
          {"angles.csv", to_csv(t)}};
}

std::vector<Artifact> render_sums(const RunPlan &plan) {
  const double a = plan.params["a"].get<double>();
  const std::int64_t n = plan.params["totient_n"].get<std::int64_t>();
  const double sigma = plan.config.sigma;
  Table t{{"quantity", "exact", "asymptotic", "ratio"}, {}};
  json rows = json::array();
  auto add = [&](const std::string &name, double exact, double asym) {
    t.rows.push_back({name, num(exact), num(asym), num(exact / asym)});
    rows.push_back({{"quantity", name}, {"exact", exact}, {"asymptotic", asym}, {"ratio", exact / asym}});
  };
  const auto ts = totient_sum(n, a);
  add("totient_sum", ts.exact, ts.asymptotic);
  const auto cs = corridor_sum(sigma, a);
  add("corridor_sum", cs.exact, cs.asymptotic);
  add("abar_scaled", 0.5 * sigma * abar({1.0, 0.0}, sigma), 1.0 / kPi);
  json result{{"sigma", sigma}, {"a", a}, {"totient_n", n}, {"rows", rows}};
  return {{"sums.json", dump(envelope(plan, config_hash(plan.config), result))},
          {"sums.csv", to_csv(t)}};
}

std::vector<Artifact> render_clt(const RunPlan &plan) {
  const auto r = clt_experiment(plan.config);
  std::vector<double> x(r.kappa.size()), y(r.kappa.size());
  Table t{{"trial", "kappa_x", "kappa_y"}, {}};
  t.rows.reserve(r.kappa.size());
  for (std::size_t i = 0; i < r.kappa.size(); ++i) {
    x[i] = static_cast<double>(r.kappa[i].x) / r.b;
    y[i] = static_cast<double>(r.kappa[i].y) / r.b;
    t.rows.push_back({num(static_cast<std::uint64_t>(i)), num(r.kappa[i].x), num(r.kappa[i].y)});
  }
  const double half = 4.0 / std::sqrt(kPi);
  json result{{"sigma", r.sigma},
              {"n", r.n},
              {"trials", r.trials},
              {"b", r.b},
              {"cov", mat(r.cov)},
              {"cov_se", mat(r.cov_se)},
              {"ks_x", r.ks_x},
              {"ks_y", r.ks_y},
              {"scaled_cov", mat(r.scaled_cov)},
              {"max_step", r.max_step},
              {"target_variance", 1.0 / kPi},
              {"histogram_x", histogram(x, -half, half, 64)},
              {"histogram_y", histogram(y, -half, half, 64)}};
  const json doc = envelope(plan, r.config_hash, result);
  return {{"clt.json", dump(doc)}, {"clt.csv", to_csv(t)}, {"clt.svg", emit_plot(doc, "clt")}};
}

std::vector<Artifact> render_llt(const RunPlan &plan) {
  const auto r = llt_experiment(plan.config);
  json result{{"sigma", r.sigma},   {"n", r.n},          {"trials", r.trials},
              {"b", r.b},           {"hits", r.hits},    {"estimate", r.estimate},
              {"se", r.se},         {"target", r.target}, {"expected_hits", r.expected_hits},
              {"warning", r.warning}};
  Table t{{"sigma", "n", "trials", "b", "hits", "estimate", "se", "target", "expected_hits"},
          {{num(r.sigma), num(r.n), num(r.trials), num(r.b), num(r.hits), num(r.estimate),
            num(r.se), num(r.target), num(r.expected_hits)}}};
  return {{"llt.json", dump(envelope(plan, r.config_hash, result))}, {"llt.csv", to_csv(t)}};
}

std::vector<Artifact> render_wip(const RunPlan &plan) {
  const auto r = wip_probe(plan.config);
  Table t{{"row", "s0", "s1", "step", "cov_xx", "cov_xy", "cov_yy", "ratio_to_linear"}, {}};
  json points = json::array(), incs = json::array();
  for (const auto &p : r.points) {
    t.rows.push_back({"point", num(0.0), num(p.s), num(p.step), num(p.cov[0][0]), num(p.cov[0][1]),
                      num(p.cov[1][1]), num(p.ratio_to_linear)});
    points.push_back({{"s", p.s}, {"step", p.step}, {"cov", mat(p.cov)}, {"cov_se", mat(p.cov_se)},
                      {"ratio_to_linear", p.ratio_to_linear}});
  }
  for (const auto &p : r.increments) {
    t.rows.push_back({"increment", num(p.s0), num(p.s1), "", num(p.cov[0][0]), num(p.cov[0][1]),
                      num(p.cov[1][1]), num(p.ratio_to_linear)});
    incs.push_back({{"s0", p.s0}, {"s1", p.s1}, {"cov", mat(p.cov)},
                    {"ratio_to_linear", p.ratio_to_linear}});
  }
  json result{{"sigma", r.sigma},
              {"n", r.n},
              {"trials", r.trials},
              {"b", r.b},
              {"points", points},
              {"increments", incs},
              {"increment_correlation", r.increment_correlation},
              {"increment_correlation_se", r.increment_correlation_se}};
  return {{"wip.json", dump(envelope(plan, r.config_hash, result))}, {"wip.csv", to_csv(t)}};
}

std::vector<Artifact> render_correlation(const RunPlan &plan) {
  const auto r = correlation_experiment(plan.config);
  Table t{{"lag", "short_long", "short_long_se", "long_any", "long_any_se", "auto_xx",
           "auto_xx_se", "auto_yy", "auto_yy_se", "auto_xy", "auto_xy_se", "truncated",
           "truncated_se"},
          {}};
  auto series = [](const std::vector<LagEstimate> &v) {
    json m = json::array(), s = json::array();
    for (const auto &e : v) {
      m.push_back(e.mean);
      s.push_back(e.se);
    }
    return json{{"mean", m}, {"se", s}};
  };
  for (std::size_t j = 0; j < r.lags.size(); ++j) {
    t.rows.push_back({num(r.lags[j]), num(r.short_long[j].mean), num(r.short_long[j].se),
                      num(r.long_any[j].mean), num(r.long_any[j].se), num(r.auto_xx[j].mean),
                      num(r.auto_xx[j].se), num(r.auto_yy[j].mean), num(r.auto_yy[j].se),
                      num(r.auto_xy[j].mean), num(r.auto_xy[j].se), num(r.truncated[j].mean),
                      num(r.truncated[j].se)});
  }
  json result{{"sigma", r.sigma},
              {"n", r.n},
              {"trials", r.trials},
              {"H", r.H},
              {"H_hat", r.H_hat},
              {"lags", r.lags},
              {"short_long", series(r.short_long)},
              {"long_any", series(r.long_any)},
              {"auto_xx", series(r.auto_xx)},
              {"auto_yy", series(r.auto_yy)},
              {"auto_xy", series(r.auto_xy)},
              {"truncated", series(r.truncated)},
              {"fit", {{"valid", r.fit_valid},
                       {"lags", r.fit_lags},
                       {"slope", r.fit_slope},
                       {"slope_se", r.fit_slope_se},
                       {"slope_upper95", r.fit_slope_upper95}}}};
  const json doc = envelope(plan, r.config_hash, result);
  return {{"correlation.json", dump(doc)},
          {"correlation.csv", to_csv(t)},
          {"correlation.svg", emit_plot(doc, "correlation")}};
}

std::vector<Artifact> render_invariance(const RunPlan &plan) {
  Table t{{"steps", "samples", "ks_theta", "ks_phi"}, {}};
  json rows = json::array();
  for (const auto &s : plan.params["steps"]) {
    const auto r = invariance_test(plan.config, s.get<int>());
    t.rows.push_back({num(r.steps), num(r.samples), num(r.ks_theta), num(r.ks_phi)});
    rows.push_back({{"steps", r.steps}, {"samples", r.samples}, {"ks_theta", r.ks_theta},
                    {"ks_phi", r.ks_phi}});
  }
  json result{{"sigma", plan.config.sigma}, {"rows", rows}};
  return {{"invariance.json", dump(envelope(plan, config_hash(plan.config), result))},
          {"invariance.csv", to_csv(t)}};
}

std::vector<Artifact> render_charincrement(const RunPlan &plan) {
  const auto r = char_increment_experiment(plan.config);
  Table t{{"t_x", "t_y", "real", "real_se", "imag", "imag_se", "abar", "prediction_4pi",
           "prediction_8pi", "ratio_4pi", "ratio_8pi", "better"},
          {}};
  json rows = json::array();
  for (std::size_t k = 0; k < r.t.size(); ++k) {
    const auto &v = r.values[k];
    t.rows.push_back({num(r.t[k].x), num(r.t[k].y), num(v.real), num(v.real_se), num(v.imag),
                      num(v.imag_se), num(v.abar), num(v.prediction_4pi), num(v.prediction_8pi),
                      num(v.ratio_4pi), num(v.ratio_8pi), r.better[k]});
    rows.push_back({{"t", vec(r.t[k])},
                    {"real", v.real},
                    {"real_se", v.real_se},
                    {"imag", v.imag},
                    {"imag_se", v.imag_se},
                    {"abar", v.abar},
                    {"prediction_4pi", v.prediction_4pi},
                    {"prediction_8pi", v.prediction_8pi},
                    {"ratio_4pi", v.ratio_4pi},
                    {"ratio_8pi", v.ratio_8pi},
                    {"better", r.better[k]}});
  }
  json result{{"sigma", r.sigma}, {"samples", r.samples}, {"rows", rows}};
  return {{"charincrement.json", dump(envelope(plan, r.config_hash, result))},
          {"charincrement.csv", to_csv(t)}};
}

std::vector<Artifact> render_tail(const RunPlan &plan) {
  const auto H = plan.params["H_grid"].get<std::vector<double>>();
  const auto r = tail_experiment(plan.config, H);
  Table t{{"H", "hits", "estimate", "se", "leading"}, {}};
  json rows = json::array();
  for (const auto &p : r.points) {
    t.rows.push_back({num(p.H), num(p.hits), num(p.estimate), num(p.se), num(p.leading)});
    rows.push_back({{"H", p.H}, {"hits", p.hits}, {"estimate", p.estimate}, {"se", p.se},
                    {"leading", p.leading}});
  }
  json result{{"sigma", r.sigma},
              {"samples", r.samples},
              {"rows", rows},
              {"fit", {{"slope", r.fit.slope},
                       {"slope_se", r.fit.slope_se},
                       {"intercept", r.fit.intercept},
                       {"points", r.fit.points}}},
              {"weighted_fit", {{"slope", r.weighted_fit.slope},
                                {"slope_se", r.weighted_fit.slope_se},
                                {"intercept", r.weighted_fit.intercept},
                                {"points", r.weighted_fit.points}}}};
  const json doc = envelope(plan, r.config_hash, result);
  return {{"tail.json", dump(doc)}, {"tail.csv", to_csv(t)}, {"tail.svg", emit_plot(doc, "tail")}};
}

std::vector<Artifact> render_flight(const RunPlan &plan) {
  const auto r = flight_time_experiment(plan.config);
  json result{{"collisions", r.collisions}, {"mean_tau", r.mean_tau}, {"se", r.se},
              {"expected", r.expected}};
  Table t{{"collisions", "mean_tau", "se", "expected"},
          {{num(r.collisions), num(r.mean_tau), num(r.se), num(r.expected)}}};
  return {{"flight.json", dump(envelope(plan, r.config_hash, result))},
          {"flight.csv", to_csv(t)}};
}

std::vector<Artifact> render_lpnorm(const RunPlan &plan) {
  const auto r = lp_norm_experiment(plan.config, plan.params["p"].get<double>());
  const auto &v = r.value;
  json result{{"sigma", r.sigma},       {"p", v.p},
              {"estimate", v.estimate}, {"se", v.se},
              {"fitted_constant", v.fitted_constant}, {"samples", v.samples}};
  Table t{{"sigma", "p", "estimate", "se", "fitted_constant", "samples"},
          {{num(r.sigma), num(v.p), num(v.estimate), num(v.se), num(v.fitted_constant),
            num(v.samples)}}};
  return {{"lpnorm.json", dump(envelope(plan, r.config_hash, result))},
          {"lpnorm.csv", to_csv(t)}};
}

// ---- SVG ----

class Svg {
 public:
  static constexpr double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;

  Svg(double x0, double x1, double y0, double y1) : x0_(x0), x1_(x1), y0_(y0), y1_(y1) {
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
         << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n"
         << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n"
         << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\""
         << H - T - B << "\" fill=\"none\" stroke=\"black\"/>\n";
  }

  double px(double x) const { return L + (x - x0_) / (x1_ - x0_) * (W - L - R); }
  double py(double y) const { return H - B - (y - y0_) / (y1_ - y0_) * (H - T - B); }

  void rect(double xa, double xb, double ya, double yb, const char *fill) {
    out_ << "<rect x=\"" << f(px(xa)) << "\" y=\"" << f(py(yb)) << "\" width=\""
         << f(px(xb) - px(xa)) << "\" height=\"" << f(py(ya) - py(yb)) << "\" fill=\"" << fill
         << "\" stroke=\"none\"/>\n";
  }
  void polyline(const std::vector<std::pair<double, double>> &pts, const char *stroke,
                const char *dash = nullptr) {
    out_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\"";
    if (dash) out_ << " stroke-dasharray=\"" << dash << "\"";
    out_ << " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      out_ << (i ? " " : "") << f(px(pts[i].first)) << ',' << f(py(pts[i].second));
    }
    out_ << "\"/>\n";
  }
  void dot(double x, double y, bool filled) {
    out_ << "<circle cx=\"" << f(px(x)) << "\" cy=\"" << f(py(y)) << "\" r=\"3.5\" fill=\""
         << (filled ? "black" : "white") << "\" stroke=\"black\"/>\n";
  }
  void vbar(double x, double ya, double yb) {
    out_ << "<line x1=\"" << f(px(x)) << "\" y1=\"" << f(py(ya)) << "\" x2=\"" << f(px(x))
         << "\" y2=\"" << f(py(yb)) << "\" stroke=\"black\"/>\n";
  }
  void text(double x, double y, const std::string &s, const char *anchor = "start") {
    out_ << "<text x=\"" << f(x) << "\" y=\"" << f(y) << "\" font-family=\"monospace\" "
         << "font-size=\"11\" text-anchor=\"" << anchor << "\">" << escape(s) << "</text>\n";
  }
  void xtick(double x, const std::string &label) {
    text(px(x), H - B + 16, label, "middle");
  }
  void ytick(double y, const std::string &label) { text(L - 6, py(y) + 4, label, "end"); }

  std::string finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

  static std::string g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
  }

 private:
  static std::string f(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
  }
  static std::string escape(const std::string &s) {
    std::string o;
    for (char ch : s) {
      if (ch == '<') o += "&lt;";
      else if (ch == '>') o += "&gt;";
      else if (ch == '&') o += "&amp;";
      else o += ch;
    }
    return o;
  }

  double x0_, x1_, y0_, y1_;
  std::ostringstream out_;
};

std::string plot_clt(const json &r) {
  const json &h = r.at("histogram_x");
  const auto counts = h.at("counts").get<std::vector<double>>();
  const double lo = h.at("lo").get<double>(), hi = h.at("hi").get<double>();
  const double total = r.at("trials").get<double>();
  if (counts.empty() || total <= 0) throw EmptyData("CLT report has no histogram");
  const double w = (hi - lo) / static_cast<double>(counts.size());
  const double var = r.at("target_variance").get<double>();
  auto gauss = [&](double x) { return std::exp(-x * x / (2 * var)) / std::sqrt(2 * kPi * var); };
  double ymax = gauss(0.0);
  for (double c : counts) ymax = std::max(ymax, c / (total * w));
  Svg s(lo, hi, 0.0, 1.1 * ymax);
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double a = lo + w * static_cast<double>(k);
    s.rect(a, a + w, 0.0, counts[k] / (total * w), "#9bb7d4");
  }
  std::vector<std::pair<double, double>> curve;
  for (int i = 0; i <= 200; ++i) {
    const double x = lo + (hi - lo) * i / 200.0;
    curve.push_back({x, gauss(x)});
  }
  s.polyline(curve, "#b03030");
  for (double x : {lo, lo / 2, 0.0, hi / 2, hi}) s.xtick(x, Svg::g(x));
  for (double y : {0.0, ymax / 2, ymax}) s.ytick(y, Svg::g(y));
  s.text(Svg::L, 20, "kappa_n,x / b  vs  N(0, 1/pi)");
  s.text(Svg::W - Svg::R, 20,
         "trials=" + Svg::g(total) + " b=" + Svg::g(r.at("b").get<double>()) +
             " KS=" + Svg::g(r.at("ks_x").get<double>()),
         "end");
  return s.finish();
}

std::string plot_tail(const json &r) {
  std::vector<std::pair<double, double>> pts;
  std::vector<double> se;
  for (const auto &row : r.at("rows")) {
    if (row.at("hits").get<std::uint64_t>() == 0) continue;
    pts.push_back({std::log10(row.at("H").get<double>()), std::log10(row.at("estimate").get<double>())});
    se.push_back(row.at("se").get<double>() / row.at("estimate").get<double>() / std::log(10.0));
  }
  if (pts.empty()) throw EmptyData("tail report has no exceedances");
  double x0 = pts.front().first, x1 = pts.back().first;
  double y0 = pts.front().second, y1 = pts.front().second;
  for (const auto &p : pts) {
    x0 = std::min(x0, p.first);
    x1 = std::max(x1, p.first);
    y0 = std::min(y0, p.second);
    y1 = std::max(y1, p.second);
  }
  const double pad = 0.1 * std::max(x1 - x0, 0.5);
  x0 -= pad;
  x1 += pad;
  y0 -= 0.3;
  y1 += 0.3;
  Svg s(x0, x1, y0, y1);
  const auto ref0 = pts.front();
  s.polyline({{x0, ref0.second - 2 * (x0 - ref0.first)}, {x1, ref0.second - 2 * (x1 - ref0.first)}},
             "#b03030", "6,4");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    s.vbar(pts[i].first, pts[i].second - se[i], pts[i].second + se[i]);
    s.dot(pts[i].first, pts[i].second, true);
    s.text(s.px(pts[i].first) + 6, s.py(pts[i].second) - 6, Svg::g(std::pow(10.0, pts[i].second)));
  }
  for (const auto &p : pts) s.xtick(p.first, Svg::g(std::pow(10.0, p.first)));
  s.ytick(y0 + 0.3, "1e" + Svg::g(y0 + 0.3));
  s.ytick(y1 - 0.3, "1e" + Svg::g(y1 - 0.3));
  s.text(Svg::L, 20, "mu(|kappa| > H), log-log; dashed: slope -2");
  s.text(Svg::W - Svg::R, 20, "fitted slope=" + Svg::g(r.at("fit").at("slope").get<double>()), "end");
  return s.finish();
}

std::string plot_correlation(const json &r) {
  const auto lags = r.at("lags").get<std::vector<int>>();
  const auto mean = r.at("truncated").at("mean").get<std::vector<double>>();
  std::vector<std::pair<double, double>> pts;
  std::vector<bool> positive;
  for (std::size_t j = 0; j < lags.size() && j < mean.size(); ++j) {
    if (mean[j] == 0.0) continue;
    pts.push_back({static_cast<double>(lags[j]), std::log10(std::abs(mean[j]))});
    positive.push_back(mean[j] > 0);
  }
  if (pts.empty()) throw EmptyData("correlation report has no lags");
  double y0 = pts.front().second, y1 = y0;
  for (const auto &p : pts) {
    y0 = std::min(y0, p.second);
    y1 = std::max(y1, p.second);
  }
  Svg s(-0.5, pts.back().first + 0.5, y0 - 0.3, y1 + 0.3);
  const json &fit = r.at("fit");
  if (fit.at("valid").get<bool>() && !fit.at("lags").empty()) {
    // Fitted line in natural log, drawn through the mean of the fitted lags.
    const double slope = fit.at("slope").get<double>() / std::log(10.0);
    const auto fl = fit.at("lags").get<std::vector<int>>();
    double cx = 0, cy = 0;
    for (int j : fl) {
      cx += j;
      cy += std::log10(std::abs(mean[static_cast<std::size_t>(j)]));
    }
    cx /= static_cast<double>(fl.size());
    cy /= static_cast<double>(fl.size());
    const double xa = fl.front(), xb = fl.back();
    s.polyline({{xa, cy + slope * (xa - cx)}, {xb, cy + slope * (xb - cx)}}, "#b03030", "6,4");
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    s.dot(pts[i].first, pts[i].second, positive[i]);
    s.xtick(pts[i].first, Svg::g(pts[i].first));
  }
  s.ytick(y0, "1e" + Svg::g(y0));
  s.ytick(y1, "1e" + Svg::g(y1));
  s.text(Svg::L, 20, "|E k'.k' o T^j| by lag (filled > 0, open < 0)");
  s.text(Svg::W - Svg::R, 20, "slope=" + Svg::g(fit.at("slope").get<double>()) + " per lag", "end");
  return s.finish();
}

}  // namespace

const std::vector<std::string> &experiment_names() {
  static const std::vector<std::string> names{
      "corridors", "cellmeasure", "angles",        "sums", "clt",    "llt",   "wip",
      "correlation", "invariance", "charincrement", "tail", "flight", "lpnorm"};
  return names;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_csv(const Table &t) {
  std::string out;
  auto line = [&](const std::vector<std::string> &fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      const std::string &f = fields[i];
      if (f.find_first_of(",\"\r\n") == std::string::npos) {
        out += f;
      } else {
        out += '"';
        for (char ch : f) {
          if (ch == '"') out += '"';
          out += ch;
        }
        out += '"';
      }
    }
    out += "\r\n";
  };
  line(t.header);
  for (const auto &r : t.rows) line(r);
  return out;
}

RunPlan parse_config(const std::string &experiment, const json &file, const json &flags) {
  const auto &names = experiment_names();
  if (std::find(names.begin(), names.end(), experiment) == names.end()) {
    throw UnknownExperiment("'" + experiment + "' is not an experiment");
  }
  if (!file.is_object() && !file.is_null()) throw InvalidConfig("config", "expected a JSON object");
  json merged = file.is_null() ? json::object() : file;
  if (flags.is_object()) {
    for (const auto &[k, v] : flags.items()) merged[k] = v;
  }

  RunPlan plan;
  plan.experiment = experiment;
  ExperimentConfig &c = plan.config;
  json params = json::object();
  for (const auto &[key, v] : merged.items()) {
    if (key == "sigma") c.sigma = get_as<double>(v, key, "a number");
    else if (key == "n") c.n = get_count(v, key);
    else if (key == "trials") c.trials = get_count(v, key);
    else if (key == "seed") c.seed = get_count(v, key);
    else if (key == "threads") c.threads = static_cast<unsigned>(get_count(v, key));
    else if (key == "block_size") c.block_size = get_count(v, key);
    else if (key == "j_max") c.j_max = get_as<int>(v, key, "an integer");
    else if (key == "H") c.H = get_as<double>(v, key, "a number");
    else if (key == "H_hat") c.H_hat = get_as<double>(v, key, "a number");
    else if (key == "flight_cap") c.flight_cap = get_as<double>(v, key, "a number");
    else if (key == "s_grid") c.s_grid = get_as<std::vector<double>>(v, key, "a list of numbers");
    else if (key == "t_grid") {
      c.t_grid.clear();
      const auto pairs = get_as<std::vector<std::vector<double>>>(v, key, "a list of [x, y] pairs");
      for (const auto &p : pairs) {
        if (p.size() != 2) throw InvalidConfig(key, "expected a list of [x, y] pairs");
        c.t_grid.push_back({p[0], p[1]});
      }
    } else if (extra_keys().count(key)) {
      params[key] = v;
    } else {
      throw InvalidConfig(key, "unknown setting");
    }
  }
  validate(c);

  // Experiment-specific settings with their defaults.
  json out = json::object();
  auto take = [&](const std::string &key, json fallback) {
    out[key] = params.contains(key) ? params[key] : std::move(fallback);
  };
  if (experiment == "cellmeasure") {
    take("xi", json::array({1, 0}));
    take("N", 10);
    take("stratified", false);
  } else if (experiment == "angles") {
    take("xi", json::array({1, 0}));
    take("M_grid", json::array({100, 1000, 10000}));
  } else if (experiment == "sums") {
    take("a", 0.0);
    take("totient_n", 1000000);
  } else if (experiment == "invariance") {
    take("steps", json::array({1, 10}));
  } else if (experiment == "tail") {
    take("H_grid", json::array({16.0, 32.0, 64.0, 128.0, 256.0}));
  } else if (experiment == "lpnorm") {
    take("p", 1.0);
  }

  if (out.contains("xi")) {
    const IVec2 xi = get_ivec(out["xi"], "xi");
    if (!is_primitive(xi)) throw InvalidConfig("xi", "must be a primitive lattice vector");
  }
  for (const char *key : {"N", "totient_n"}) {
    if (!out.contains(key)) continue;
    const std::uint64_t v = get_count(out[key], key);
    if (v < 1) throw InvalidConfig(key, "must be a positive integer");
    out[key] = v;
  }
  if (out.contains("stratified") && !out["stratified"].is_boolean()) {
    throw InvalidConfig("stratified", "expected true or false");
  }
  if (out.contains("M_grid")) {
    const auto m = get_as<std::vector<std::int64_t>>(out["M_grid"], "M_grid", "a list of integers");
    if (m.empty() || *std::min_element(m.begin(), m.end()) < 2) {
      throw InvalidConfig("M_grid", "entries must be at least 2");
    }
  }
  if (out.contains("steps")) {
    const auto s = get_as<std::vector<int>>(out["steps"], "steps", "a list of integers");
    if (s.empty() || *std::min_element(s.begin(), s.end()) < 0) {
      throw InvalidConfig("steps", "entries must be non-negative");
    }
  }
  if (out.contains("H_grid")) {
    const auto h = get_as<std::vector<double>>(out["H_grid"], "H_grid", "a list of numbers");
    if (h.empty() || *std::min_element(h.begin(), h.end()) < 2.0) {
      throw InvalidConfig("H_grid", "entries must be at least 2");
    }
  }
  if (out.contains("a")) get_as<double>(out["a"], "a", "a number");
  if (out.contains("p")) get_as<double>(out["p"], "p", "a number");
  plan.params = out;
  return plan;
}

json read_config_file(const fs::path &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception &e) {
    throw InvalidConfig("config", std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidConfig("config", "expected a JSON object");
  return j;
}

json config_echo(const RunPlan &plan) {
  const ExperimentConfig &c = plan.config;
  json t = json::array();
  for (const Vec2 &v : c.t_grid) t.push_back(vec(v));
  json j{{"sigma", c.sigma},     {"n", c.n},           {"trials", c.trials},
         {"seed", c.seed},       {"t_grid", t},        {"s_grid", c.s_grid},
         {"H", c.H},             {"H_hat", c.H_hat},   {"j_max", c.j_max},
         {"flight_cap", c.flight_cap}, {"block_size", c.block_size}};
  for (const auto &[k, v] : plan.params.items()) j[k] = v;
  return j;
}

std::vector<Artifact> render_experiment(const RunPlan &plan) {
  const std::string &e = plan.experiment;
  if (e == "corridors") return render_corridors(plan);
  if (e == "cellmeasure") return render_cellmeasure(plan);
  if (e == "angles") return render_angles(plan);
  if (e == "sums") return render_sums(plan);
  if (e == "clt") return render_clt(plan);
  if (e == "llt") return render_llt(plan);
  if (e == "wip") return render_wip(plan);
  if (e == "correlation") return render_correlation(plan);
  if (e == "invariance") return render_invariance(plan);
  if (e == "charincrement") return render_charincrement(plan);
  if (e == "tail") return render_tail(plan);
  if (e == "flight") return render_flight(plan);
  if (e == "lpnorm") return render_lpnorm(plan);
  throw UnknownExperiment("'" + e + "' is not an experiment");
}

std::string emit_plot(const json &report, const std::string &kind) {
  if (kind != "clt" && kind != "tail" && kind != "correlation") {
    throw UnsupportedKind("no plot for kind '" + kind + "'");
  }
  if (!report.is_object() || report.empty() || !report.contains("result")) {
    throw EmptyData("report is empty");
  }
  const std::string have = report.value("kind", "");
  if (have != kind) throw UnsupportedKind("report of kind '" + have + "' cannot be drawn as '" + kind + "'");
  try {
    if (kind == "clt") return plot_clt(report["result"]);
    if (kind == "tail") return plot_tail(report["result"]);
    return plot_correlation(report["result"]);
  } catch (const json::exception &e) {
    throw EmptyData(std::string("report is missing plot data: ") + e.what());
  }
}

void write_atomic(const fs::path &path, const std::string &content) {
  fs::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

int exit_code_for(const std::exception &e) {
  if (const auto *err = dynamic_cast<const Error *>(&e)) {
    switch (err->kind()) {
      case ErrorKind::InvalidConfig:
      case ErrorKind::UnknownExperiment:
      case ErrorKind::NonPrimitive:
      case ErrorKind::ExponentOutOfRange:
        return 2;
      case ErrorKind::InsufficientTrials:
        return 4;
      default:
        return 3;
    }
  }
  return 3;
}

RunOutcome run_experiment(const RunPlan &plan, const fs::path &out_dir) {
  RunOutcome outcome;
  json &m = outcome.manifest;
  m = json{{"schema_version", kSchemaVersion},
           {"kind", "manifest"},
           {"version", kVersion},
           {"experiment", plan.experiment},
           {"seed", plan.config.seed},
           {"config", config_echo(plan)},
           {"threads", resolve_threads(plan.config)},
           {"started", iso_now()}};
  m["config"]["threads"] = plan.config.threads;
  json outputs = json::array();
  std::vector<fs::path> partial;
  try {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    const auto artifacts = render_experiment(plan);
    for (const auto &a : artifacts) {
      fs::path p = out_dir / a.name;
      fs::path tmp = p;
      tmp += ".partial";
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw IoError("cannot open " + tmp.string());
      out.write(a.content.data(), static_cast<std::streamsize>(a.content.size()));
      out.flush();
      if (!out) throw IoError("short write to " + tmp.string());
      partial.push_back(p);
    }
    for (const auto &p : partial) {
      fs::path tmp = p;
      tmp += ".partial";
      fs::rename(tmp, p, ec);
      if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
      outputs.push_back(p.filename().string());
    }
    m["status"] = "ok";
  } catch (const std::exception &e) {
    outcome.exit_code = exit_code_for(e);
    const auto *err = dynamic_cast<const Error *>(&e);
    m["status"] = "error";
    m["error"] = {{"kind", err ? to_string(err->kind()) : "Internal"}, {"message", e.what()}};
    json kept = json::array();
    for (const auto &p : partial) {
      fs::path tmp = p;
      tmp += ".partial";
      if (fs::exists(tmp)) kept.push_back(tmp.filename().string());
    }
    m["partial_outputs"] = kept;
  }
  m["outputs"] = outputs;
  m["finished"] = iso_now();
  try {
    write_atomic(out_dir / "manifest.json", m.dump(2) + "\n");
  } catch (const std::exception &) {
    if (outcome.exit_code == 0) outcome.exit_code = 3;
  }
  return outcome;
}

RunOutcome record_failure(const std::string &experiment, const json &raw, const std::exception &e,
                          const fs::path &out_dir) {
  RunOutcome outcome;
  outcome.exit_code = exit_code_for(e);
  const auto *err = dynamic_cast<const Error *>(&e);
  const std::string now = iso_now();
  outcome.manifest = json{{"schema_version", kSchemaVersion},
                          {"kind", "manifest"},
                          {"version", kVersion},
                          {"experiment", experiment},
                          {"config", raw.is_object() ? raw : json::object()},
                          {"started", now},
                          {"finished", now},
                          {"status", "error"},
                          {"error", {{"kind", err ? to_string(err->kind()) : "Internal"},
                                     {"message", e.what()}}},
                          {"outputs", json::array()}};
  try {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    write_atomic(out_dir / "manifest.json", outcome.manifest.dump(2) + "\n");
  } catch (const std::exception &) {
  }
  return outcome;
}

}  // namespace lorentz::io
