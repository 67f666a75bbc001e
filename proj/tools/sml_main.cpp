// Command-line front end: wires the library modules into reproducible,
// seeded experiments and emits CSV/JSON artifacts.
//
// Exit codes: 0 ok, 1 estimate violation detected, 2 usage error,
// 3 numerical failure.

#include <cmath>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nlohmann/json.hpp"
#include "sml/discretization.hpp"
#include "sml/euclidean.hpp"
#include "sml/exponents.hpp"
#include "sml/interp.hpp"
#include "sml/io.hpp"
#include "sml/manifold.hpp"
#include "sml/rigidity_flow.hpp"
#include "sml/rng.hpp"
#include "sml/schrodinger.hpp"
#include "sml/threading.hpp"

namespace {

using namespace sml;

ManifoldProfile parse_manifold(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "sphere") return make_sphere(std::stoi(arg));
  if (kind == "circle") return make_circle(std::stod(arg));
  if (kind == "revolution") return load_revolution_profile(arg);
  throw CLI::ValidationError("--manifold must be sphere:d | circle:L | revolution:file");
}

std::vector<double> parse_range(const std::string& spec) {
  // lo:hi:count[:lin], default log spacing
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : spec) {
    if (ch == ':') {
      parts.push_back(cur);
      cur.clear();
    } else
      cur += ch;
  }
  parts.push_back(cur);
  if (parts.size() < 3) throw CLI::ValidationError("range must be lo:hi:count[:lin]");
  const double lo = std::stod(parts[0]), hi = std::stod(parts[1]);
  const int count = std::stoi(parts[2]);
  const bool linear = parts.size() > 3 && parts[3] == "lin";
  std::vector<double> out;
  for (int i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    out.push_back(linear ? lo + t * (hi - lo) : lo * std::pow(hi / lo, t));
  }
  return out;
}

nlohmann::ordered_json config_echo(const std::string& cmd, const std::string& manifold, double q,
                                   int n, unsigned seed) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["command"] = cmd;
  j["manifold"] = manifold;
  j["q"] = q;
  j["n"] = n;
  j["seed"] = seed;
  return j;
}

int cmd_mu_curve(const std::string& manifold_spec, double q, const std::string& range, int n,
                 unsigned seed, const std::string& out, double tol) {
  const ManifoldProfile m = parse_manifold(manifold_spec);
  const ExponentSet e = build_exponents(m.d, q);
  const std::vector<double> alphas = parse_range(range);
  MinimizeOptions opts;
  opts.n = n;
  opts.seed = seed;
  const Curve curve = curve_sweep(m, e, alphas, CurveKind::mu, opts);
  write_curve_csv(curve, out + ".csv");

  // Summary: linear-regime threshold estimate and the asymptotic ratio.
  const GridPtr g = curve.points.front().minimizer.grid;
  const double kappa_h = std::pow(g->volume, 1.0 - 2.0 / q);
  double threshold_est = 0.0;
  for (const auto& pt : curve.points)
    if (std::abs(pt.value - kappa_h * pt.param) <= tol * kappa_h * pt.param)
      threshold_est = pt.param;
  nlohmann::ordered_json j = config_echo("mu-curve", m.descriptor, q, n, seed);
  j["alpha_range"] = range;
  j["kappa"] = kappa_h;
  j["linear_regime_up_to"] = threshold_est;
  const auto& last = curve.points.back();
  j["alpha_max"] = last.param;
  j["asymptotic_ratio_mu_over_kqd_alpha"] =
      last.value * std::pow(last.param, e.vartheta - 1.0) / kqd(e);
  std::ofstream(out + ".json") << j.dump(2) << "\n";
  std::cout << "wrote " << out << ".csv and " << out << ".json\n";
  return 0;
}

int cmd_kqd(int d, double q, double tol) {
  const ExponentSet e = build_exponents(d, q);
  const RadialGroundState gs = shoot_ground_state(e, tol);
  std::cout << "K_{q,d}(q=" << fmt_g17(q) << ", d=" << d << ") = " << fmt_g17(kqd(gs)) << "\n"
            << "amplitude v(0) = " << fmt_g17(gs.amplitude)
            << "\nradius_max = " << fmt_g17(gs.radius_max)
            << "\nscaling_residual = " << fmt_g17(gs.scaling_residual)
            << "\node_residual = " << fmt_g17(gs.ode_residual) << "\n";
  return 0;
}

int cmd_spectral_check(const std::string& manifold_spec, double q, int count,
                       const std::string& which, int n, unsigned seed, const std::string& out,
                       double tol) {
  const ManifoldProfile m = parse_manifold(manifold_spec);
  const ExponentSet e = build_exponents(m.d, q);
  const GridPtr g = build_grid(m, n);
  std::vector<SpectralCertificate> certs(count);
  parallel_for(count, [&](std::size_t i) {
    const unsigned s = seed + static_cast<unsigned>(i);
    MinimizeOptions opts;
    opts.n = n;
    opts.seed = s;
    if (which == "lower") {
      const GridFunction W = random_potential(g, s, PotentialMode::strictly_positive);
      certs[i] = certify_potential_bound(m, e, W, opts);
    } else {
      const GridFunction V = random_potential(g, s, PotentialMode::nonnegative_well);
      certs[i] = certify_well_bound(m, e, V, opts);
    }
    certs[i].seed = s;
  });
  write_certificates_json(certs, out);
  int violations = 0;
  for (const auto& c : certs)
    if (c.gap < -tol * c.scale()) ++violations;
  std::cout << count << " certificates -> " << out << "; violations: " << violations << "\n";
  return violations ? 1 : 0;
}

int cmd_flow(const std::string& manifold_spec, double q, double lambda, double T, int n,
             unsigned seed, const std::string& out) {
  const ManifoldProfile m = parse_manifold(manifold_spec);
  const ExponentSet e = build_exponents(m.d, q);
  if (!e.flow_available) throw std::invalid_argument("flow unavailable for these exponents");
  const GridPtr g = build_grid(m, n);
  Rng rng(seed);
  const auto c = random_series_coeffs(rng, 5, 0.3);
  Vec u0(g->n);
  for (int j = 0; j < g->n; ++j) {
    double acc = 1.0;
    for (std::size_t k = 1; k < c.size(); ++k)
      acc += c[k] * std::cos(k * M_PI * g->nodes[j] / m.domain_length);
    u0[j] = std::abs(acc) + 0.2;
  }
  const double kappa = std::pow(g->volume, 1.0 - 2.0 / q);
  const double lambda_hint = lambda_star_upper_bound(m, e, 2, seed);
  FlowOptions fopts;
  fopts.enforce_monotone = lambda <= lambda_hint + 1e-9;
  if (!fopts.enforce_monotone)
    std::cerr << "warning: lambda = " << lambda << " exceeds the rigidity-threshold bound "
              << lambda_hint << "; F decay is not guaranteed\n";
  const FlowTrace tr = run_flow(GridFunction(g, u0), e, lambda, T, kappa, fopts);
  write_flow_csv(tr, out);
  std::cout << "flow trace (" << tr.times.size() << " steps) -> " << out
            << "; final distance " << fmt_g17(tr.sup_distance.back()) << "\n";
  if (fopts.enforce_monotone && !tr.monotone) return 1;
  return 0;
}

int cmd_rigidity(const std::string& manifold_spec, double q, double lambda,
                 const std::string& bisect, int inits, int n, unsigned seed,
                 const std::string& out) {
  const ManifoldProfile m = parse_manifold(manifold_spec);
  const ExponentSet e = build_exponents(m.d, q);
  nlohmann::ordered_json j = config_echo("rigidity", m.descriptor, q, n, seed);
  if (!bisect.empty()) {
    const auto range = parse_range(bisect + ":2:lin");
    const auto [lo, hi] =
        bisect_rigidity_lambda(m, e, range.front(), range.back(), 0.005, inits, seed);
    j["bisect_lo"] = lo;
    j["bisect_hi"] = hi;
    std::cout << "operational rigidity threshold in [" << fmt_g17(lo) << ", " << fmt_g17(hi)
              << "]\n";
  } else {
    const RigidityReport rep = rigidity_scan(m, e, lambda, inits, seed, nullptr, n);
    j["report"] = nlohmann::ordered_json::parse(rigidity_report_json(rep));
    std::cout << "lambda = " << lambda << ": " << rep.solutions.size()
              << " distinct positive solutions ("
              << (rep.has_nonconstant() ? "nonconstant branch present" : "constant only")
              << ")\n";
  }
  std::ofstream(out) << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical toolkit for optimal interpolation constants, rigidity thresholds and "
               "spectral estimates on model manifolds"};
  app.require_subcommand(1);

  std::string manifold = "sphere:2", out = "out", which = "upper", range = "0.1:10:10",
              bisect;
  double q = 4.0, lambda = 2.0, T = 50.0, tol = 1e-7, shoot_tol = 1e-13;
  int n = 800, count = 20, d = 1, inits = 30;
  unsigned seed = 1;

  auto* mu = app.add_subcommand("mu-curve", "sweep the optimal constant mu(alpha)");
  mu->add_option("--manifold", manifold);
  mu->add_option("--q", q)->required();
  mu->add_option("--alpha-range", range)->required();
  mu->add_option("--n", n);
  mu->add_option("--seed", seed);
  mu->add_option("--out", out);
  mu->add_option("--tol", tol);

  auto* kq = app.add_subcommand("kqd", "sharp Euclidean constant by radial shooting");
  kq->add_option("--d", d)->required();
  kq->add_option("--q", q)->required();
  kq->add_option("--tol", shoot_tol);

  auto* sc = app.add_subcommand("spectral-check", "randomized eigenvalue-bound certificates");
  sc->add_option("--manifold", manifold);
  sc->add_option("--q", q)->required();
  sc->add_option("--count", count);
  sc->add_option("--which", which)->check(CLI::IsMember({"upper", "lower"}));
  sc->add_option("--n", n);
  sc->add_option("--seed", seed);
  sc->add_option("--out", out);
  sc->add_option("--tol", tol);

  auto* fl = app.add_subcommand("flow", "nonlinear diffusion flow with its Lyapunov trace");
  fl->add_option("--manifold", manifold);
  fl->add_option("--q", q)->required();
  fl->add_option("--lambda", lambda)->required();
  fl->add_option("--T", T);
  fl->add_option("--n", n);
  fl->add_option("--seed", seed);
  fl->add_option("--out", out);

  auto* ri = app.add_subcommand("rigidity", "Newton scan / threshold bisection for the "
                                            "nonlinear elliptic equation");
  ri->add_option("--manifold", manifold);
  ri->add_option("--q", q)->required();
  ri->add_option("--lambda", lambda);
  ri->add_option("--bisect", bisect, "lo:hi bracket for the threshold bisection");
  ri->add_option("--inits", inits);
  ri->add_option("--n", n);
  ri->add_option("--seed", seed);
  ri->add_option("--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return err.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    if (mu->parsed()) return cmd_mu_curve(manifold, q, range, n, seed, out, tol);
    if (kq->parsed()) return cmd_kqd(d, q, shoot_tol);
    if (sc->parsed()) return cmd_spectral_check(manifold, q, count, which, n, seed, out, tol);
    if (fl->parsed()) return cmd_flow(manifold, q, lambda, T, n, seed, out);
    if (ri->parsed()) return cmd_rigidity(manifold, q, lambda, bisect, inits, n, seed, out);
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "numerical failure: " << err.what() << "\n";
    return 3;
  }
  return 2;
}
