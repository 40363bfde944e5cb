#include "cqnls/run.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cqnls/hartree.hpp"
#include "cqnls/radial.hpp"
#include "cqnls/spectral.hpp"
#include "cqnls/svg.hpp"
#include "cqnls/townes.hpp"

namespace cqnls {

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(double v) { return format_real(v); }
std::string fmt(int v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

/// Short form for check names and plot labels.
std::string label(double v) {
  std::ostringstream o;
  o << v;
  return o.str();
}

int checked_int(const RunConfig& cfg, const std::string& key, long long lo, long long hi) {
  const long long v = cfg.integer(key);
  if (v < lo || v > hi) {
    throw ConfigError("key '" + key + "': expected an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) +
                      "], got " + std::to_string(v));
  }
  return static_cast<int>(v);
}

SolverOptions solver_options(const RunConfig& cfg) {
  SolverOptions o;
  o.tol = cfg.real("tol");
  o.max_iterations = checked_int(cfg, "max-iterations", 1, 100000000);
  return o;
}

CartesianGrid2D grid_from(const RunConfig& cfg) {
  return CartesianGrid2D(cfg.real("half-width"), checked_int(cfg, "grid-points", 16, 1 << 14));
}

int jobs(const RunConfig& cfg) { return checked_int(cfg, "jobs", 1, 1024); }

Geometry geometry_from(const RunConfig& cfg) {
  const std::string& m = cfg.text("mode");
  if (m == "trapped") return Geometry::Trapped;
  if (m == "homogeneous") return Geometry::Homogeneous;
  throw ConfigError("key 'mode': expected trapped or homogeneous, got '" + m + "'");
}

std::vector<double> geometric(double start, double factor, int steps) {
  std::vector<double> out;
  for (int n = 0; n < steps; ++n) out.push_back(start * std::pow(factor, n));
  return out;
}

KernelPair kernels_from(const RunConfig& cfg) {
  return {two_body_from_spec(cfg.text("kernel2"), cfg.real("alpha")),
          three_body_from_spec(cfg.text("kernel3"), cfg.real("beta"))};
}

/// h1 strictly decreasing over the last three points.
bool tail_decreasing(const std::vector<double>& h1) {
  const std::size_t n = h1.size();
  return n >= 3 && h1[n - 3] > h1[n - 2] && h1[n - 2] > h1[n - 1];
}

Table collapse_table(const std::string& name, const std::vector<CollapsePoint>& points, double predicted) {
  Table t{name, {"n", "ell", "a", "b", "energy", "coefficient", "predicted", "h1_distance", "iterations", "converged"}, {}};
  for (const auto& p : points) {
    t.rows.push_back({fmt(p.index), fmt(p.ell), fmt(p.a), fmt(p.b), fmt(p.energy), fmt(p.coefficient), fmt(predicted),
                      fmt(p.h1_distance), fmt(p.iterations), fmt(p.converged)});
  }
  return t;
}

struct Output {
  ScanReport report;
  std::vector<std::pair<std::string, Plot>> plots;
};

Output run_townes(const RunConfig& cfg) {
  const auto t0 = Clock::now();
  const ShootingOptions opts{cfg.real("r-max"), cfg.real("shoot-tol"), cfg.real("spacing")};
  const RadialProfile q = shoot_townes(opts);
  const double a_star = critical_mass(q);
  const RadialProfile q0 = normalize_q0(q);
  const std::vector<double> s_list = cfg.reals("s-list");
  const TownesConstants c = townes_constants(q0, a_star, s_list);
  const RadialNorms norms = radial_norms(q0);
  const double residual = townes_residual(q, opts.r_max - 2.0);
  const double l2 = std::abs(norms.l2_sq - 1.0);
  const double grad = std::abs(norms.grad_sq - 1.0);
  const double l4 = std::abs(0.5 * a_star * norms.l4_4 - 1.0);
  const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();

  Output out;
  Table t{"townes.csv", {"quantity", "value"}, {}};
  t.rows.push_back({"q_center", fmt(central_value(q))});
  t.rows.push_back({"a_star", fmt(a_star)});
  t.rows.push_back({"q6", fmt(c.q6)});
  for (double s : s_list) t.rows.push_back({"qs_" + label(s), fmt(c.qs_at(s))});
  t.rows.push_back({"l2_identity_residual", fmt(l2)});
  t.rows.push_back({"gradient_identity_residual", fmt(grad)});
  t.rows.push_back({"l4_identity_residual", fmt(l4)});
  t.rows.push_back({"ode_residual", fmt(residual)});
  out.report.tables.push_back(std::move(t));

  Table profile{"townes_profile.csv", {"r", "q", "q0"}, {}};
  const auto nodes = q.grid().nodes();
  for (std::size_t i = 0; i < nodes.size(); i += 20) {
    profile.rows.push_back({fmt(nodes[i]), fmt(q.values()[i]), fmt(q0.values()[i])});
  }
  out.report.tables.push_back(std::move(profile));

  Series series{"Q", {}};
  for (std::size_t i = 0; i < nodes.size() && nodes[i] <= 10.0; i += 20) series.points.emplace_back(nodes[i], q.values()[i]);
  out.plots.push_back({"townes_profile.svg", Plot{"Townes profile", "r", "Q(r)", false, false, {series}, {}}});

  auto& v = out.report.verdicts;
  v.push_back(make_verdict(1, "q_center", std::abs(central_value(q) - 2.2062) <= 1e-3, central_value(q), 2.2062, 1e-3));
  v.push_back(make_verdict(1, "a_star", std::abs(a_star - 11.7009) <= 2e-3, a_star, 11.7009, 2e-3));
  v.push_back(make_verdict(1, "l2_identity", l2 <= 1e-6, norms.l2_sq, 1.0, 1e-6));
  v.push_back(make_verdict(1, "gradient_identity", grad <= 1e-6, norms.grad_sq, 1.0, 1e-6));
  v.push_back(make_verdict(1, "l4_identity", l4 <= 1e-6, 0.5 * a_star * norms.l4_4, 1.0, 1e-6));
  v.push_back(make_verdict(1, "runtime_seconds", seconds < 5.0, seconds, 5.0, 0.0));
  return out;
}

Output run_gs(const RunConfig& cfg) {
  const NlsParams p{cfg.real("a"), cfg.real("b"), cfg.real("s"), geometry_from(cfg), cfg.real("trap-strength")};
  p.validate();
  const CartesianGrid2D grid = grid_from(cfg);
  const auto& ref = townes_reference();
  double ell = 1.0;
  if (p.mode == Geometry::Homogeneous || ref.constants.qs.contains(p.s)) {
    ell = trial_optimal_scale(p, ref.constants).value_or(1.0);
  }
  const GroundStateResult r = minimize_nls(p, embed_scaled(ref.q0, grid, ell), solver_options(cfg));

  Output out;
  out.report.tables.push_back(Table{"gs.csv",
                                    {"a", "b", "s", "mode", "energy", "kinetic", "iterations", "residual", "status"},
                                    {{fmt(p.a), fmt(p.b), fmt(p.s), cfg.text("mode"), fmt(r.energy),
                                      fmt(grad_norm_sq(r.field)), fmt(r.iterations), fmt(r.gradient_residual),
                                      to_string(r.status)}}});
  Table cut{"gs_profile.csv", {"x", "v"}, {}};
  Series series{"v(x, 0)", {}};
  const int m = grid.points();
  for (int i = 0; i < m; ++i) {
    cut.rows.push_back({fmt(grid.coord(i)), fmt(r.field(i, m / 2))});
    series.points.emplace_back(grid.coord(i), r.field(i, m / 2));
  }
  out.report.tables.push_back(std::move(cut));
  out.plots.push_back({"gs_profile.svg", Plot{"Ground state cut", "x", "v(x, 0)", false, false, {series}, {}}});
  return out;
}

Output run_phase(const RunConfig& cfg) {
  const double a_star = townes_reference().constants.a_star;
  const double s = cfg.real("s");
  struct Cell {
    double ratio;
    double b;
  };
  std::vector<Cell> cells;
  for (double ratio : cfg.reals("a-ratios")) {
    for (double b : cfg.reals("b-values")) cells.push_back({ratio, b});
  }
  const auto phases = ordered_map(cells.size(), jobs(cfg), [&](std::size_t i) {
    return classify_phase(NlsParams{cells[i].ratio * a_star, cells[i].b, s, Geometry::Trapped, 1.0});
  });

  Output out;
  Table t{"phase.csv", {"a_ratio", "a", "b", "s", "phase"}, {}};
  for (std::size_t i = 0; i < cells.size(); ++i) {
    t.rows.push_back({fmt(cells[i].ratio), fmt(cells[i].ratio * a_star), fmt(cells[i].b), fmt(s), to_string(phases[i])});
    // Expected phases on the acceptance matrix, written out cell by cell.
    const bool in_matrix = s == 2.0 && (cells[i].ratio == 0.5 || cells[i].ratio == 1.0 || cells[i].ratio == 1.5) &&
                           (cells[i].b == 0.0 || cells[i].b == 0.05);
    if (!in_matrix) continue;
    Phase expected = Phase::Minimizer;
    if (cells[i].b == 0.0 && cells[i].ratio == 1.5) expected = Phase::Unbounded;
    if (cells[i].b == 0.0 && cells[i].ratio == 1.0) expected = Phase::ZeroInfimumNoMinimizer;
    out.report.verdicts.push_back(make_verdict(3, "a=" + label(cells[i].ratio) + "a* b=" + label(cells[i].b) + " " +
                                                      to_string(phases[i]),
                                               phases[i] == expected, static_cast<double>(phases[i]),
                                               static_cast<double>(expected), 0.0));
  }
  out.report.tables.push_back(std::move(t));
  return out;
}

Output run_collapse(const RunConfig& cfg) {
  CollapseSpec spec;
  spec.zeta = cfg.real("zeta");
  spec.s = cfg.real("s");
  spec.constants = townes_reference().constants;
  spec.ell_schedule = geometric(cfg.real("ell-start"), cfg.real("ell-factor"), checked_int(cfg, "steps", 1, 1000));
  spec.validate();
  const auto points = collapse_scan(spec, grid_from(cfg), solver_options(cfg));
  const double predicted = predicted_coefficient(spec.zeta, spec.s);

  Output out;
  out.report.points = points;
  out.report.tables.push_back(collapse_table("collapse.csv", points, predicted));
  Series coef{"E / (Q_s ell^s)", {}};
  std::vector<double> ells, h1;
  for (const auto& p : points) {
    coef.points.emplace_back(p.ell, p.coefficient);
    ells.push_back(p.ell);
    h1.push_back(p.h1_distance);
  }
  out.plots.push_back({"collapse.svg", Plot{"Trapped collapse, zeta = " + label(spec.zeta), "ell", "energy coefficient",
                                            true, false, {coef}, {{"1/2 + 1/s - zeta/4", predicted}}}});
  if (points.size() >= 3) out.report.fit = fit_power_law(ells, h1);

  const auto& last = points.back();
  auto& v = out.report.verdicts;
  v.push_back(make_verdict(4, "final_coefficient", std::abs(last.coefficient - predicted) <= 0.05 * std::abs(predicted),
                           last.coefficient, predicted, 0.05));
  v.push_back(make_verdict(4, "final_h1_distance", last.h1_distance < 0.05, last.h1_distance, 0.0, 0.05));
  v.push_back(make_verdict(4, "h1_decreasing_last_3", tail_decreasing(h1), last.h1_distance, 0.0, 0.0));
  return out;
}

Output run_homog(const RunConfig& cfg) {
  const auto& c = townes_reference().constants;
  const int steps = checked_int(cfg, "steps", 1, 1000);
  std::vector<double> as, bs;
  for (int n = 0; n < steps; ++n) {
    as.push_back(c.a_star * (1.0 + cfg.real("a-excess") * std::pow(cfg.real("a-factor"), n)));
    bs.push_back(cfg.real("b-start") * std::pow(cfg.real("b-factor"), n));
  }
  const CartesianGrid2D grid = grid_from(cfg);
  const SolverOptions opts = solver_options(cfg);
  const auto points = homog_collapse_scan(as, bs, c, grid, opts);

  Output out;
  out.report.points = points;
  out.report.tables.push_back(collapse_table("homog.csv", points, -1.0));
  Series ratio{"normalized ratio", {}};
  for (const auto& p : points) ratio.points.emplace_back(p.ell, p.coefficient);
  out.plots.push_back({"homog.svg", Plot{"Homogeneous collapse", "ell", "G 4 a*^2 Q6 b / (a - a*)^2", true, false,
                                         {ratio}, {{"-1", -1.0}}}});

  const double a = cfg.real("scaling-a-ratio") * c.a_star;
  const std::vector<double> b_values = cfg.reals("scaling-b");
  const auto energies = ordered_map(b_values.size() + 1, jobs(cfg), [&](std::size_t i) {
    return homog_ground_state(a, i == 0 ? 1.0 : b_values[i - 1], c, grid, opts).energy;
  });
  Table scaling{"homog_scaling.csv", {"a", "b", "energy", "energy_b1_over_b", "relative_difference"}, {}};
  auto& v = out.report.verdicts;
  for (std::size_t i = 0; i < b_values.size(); ++i) {
    const double predicted = energies[0] / b_values[i];
    const double rel = std::abs(energies[i + 1] - predicted) / std::abs(predicted);
    scaling.rows.push_back({fmt(a), fmt(b_values[i]), fmt(energies[i + 1]), fmt(predicted), fmt(rel)});
    v.push_back(make_verdict(5, "scaling_b=" + label(b_values[i]), rel <= 1e-6, energies[i + 1], predicted, 1e-6));
  }
  out.report.tables.push_back(std::move(scaling));
  const double final_ratio = points.back().coefficient;
  v.push_back(make_verdict(6, "final_ratio", std::abs(final_ratio + 1.0) <= 0.05, final_ratio, -1.0, 0.05));
  return out;
}

Output run_hartree(const RunConfig& cfg) {
  const auto& ref = townes_reference();
  const KernelPair kernels = kernels_from(cfg);
  const double a = cfg.real("a-ratio") * ref.constants.a_star;
  const double b = cfg.real("b");
  const double s = cfg.real("s");
  const CartesianGrid2D grid = grid_from(cfg);
  const SolverOptions opts = solver_options(cfg);
  const int max_points = checked_int(cfg, "max-points", 16, 1 << 14);
  const std::vector<double> ns = cfg.reals("n-list");
  if (ns.empty()) throw ConfigError("key 'n-list': expected at least one N");

  const NlsParams limit{a, b, s, Geometry::Trapped, 1.0};
  double ell = 1.0;
  if (ref.constants.qs.contains(s)) ell = trial_optimal_scale(limit, ref.constants).value_or(1.0);
  const GroundStateResult nls = minimize_nls(limit, embed_scaled(ref.q0, grid, ell), opts);
  const auto results = ordered_map(ns.size(), jobs(cfg), [&](std::size_t i) {
    const HartreeParams p{kernels, a, b, ns[i], s, Geometry::Trapped, 1.0, 1.0};
    return minimize_hartree(p, nls.field, opts, max_points);
  });

  Output out;
  Table t{"hartree.csv", {"n", "energy_hartree", "energy_nls", "relative_gap", "h1_to_nls", "iterations", "converged"}, {}};
  Series gap{"|E_H - E_NLS| / |E_NLS|", {}};
  std::vector<double> gaps;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const double rel = std::abs(results[i].energy - nls.energy) / std::abs(nls.energy);
    gaps.push_back(rel);
    gap.points.emplace_back(ns[i], rel);
    t.rows.push_back({fmt(ns[i]), fmt(results[i].energy), fmt(nls.energy), fmt(rel),
                      fmt(h1_distance(results[i].field, nls.field)), fmt(results[i].iterations),
                      fmt(results[i].converged)});
  }
  out.report.tables.push_back(std::move(t));
  out.plots.push_back({"hartree.svg", Plot{"Hartree energy against its NLS limit", "N", "relative gap", true, true,
                                           {gap}, {{"2%", 0.02}}}});
  bool decreasing = true;
  for (std::size_t i = 1; i < gaps.size(); ++i) decreasing = decreasing && gaps[i] < gaps[i - 1];
  auto& v = out.report.verdicts;
  v.push_back(make_verdict(9, "relative_gap_at_largest_n", gaps.back() < 0.02, gaps.back(), 0.0, 0.02));
  v.push_back(make_verdict(9, "gap_decreasing_in_n", decreasing, gaps.back(), 0.0, 0.0));
  return out;
}

Output run_lemma(const RunConfig& cfg) {
  const KernelPair kernels = kernels_from(cfg);
  const CartesianGrid2D grid = grid_from(cfg);
  const double w = cfg.real("v-width");
  if (!(w > 0.0)) throw ConfigError("key 'v-width': expected a positive real");
  const Field2D v = normalized(Field2D::from_function(grid, [w](double x, double y) {
    return std::exp(-0.5 * (x * x + y * y) / (w * w));
  }));
  const std::vector<double> ns = cfg.reals("n-list");
  const TwoBodyRateReport two = lemma_two_body_rate(v, kernels.two_body, ns);
  const ThreeBodyDefectReport three =
      lemma_three_body_defect(v, kernels.three_body, ns, checked_int(cfg, "max-points", 16, 1 << 14));

  Output out;
  Table t{"lemma.csv", {"N", "defect2", "bound2", "defect3"}, {}};
  Series d2{"two-body defect", {}}, b2{"two-body bound", {}}, d3{"three-body defect", {}};
  for (std::size_t i = 0; i < ns.size(); ++i) {
    t.rows.push_back({fmt(ns[i]), fmt(two.points[i].defect), fmt(two.points[i].bound), fmt(three.points[i].defect)});
    if (two.points[i].defect > 0.0) d2.points.emplace_back(ns[i], two.points[i].defect);
    b2.points.emplace_back(ns[i], two.points[i].bound);
    if (three.points[i].defect > 0.0) d3.points.emplace_back(ns[i], three.points[i].defect);
  }
  out.report.tables.push_back(std::move(t));
  out.report.fit = two.fit;
  out.plots.push_back({"lemma.svg", Plot{"Kernel defects", "N", "defect", true, true, {d2, b2, d3}, {}}});

  const double alpha = kernels.two_body.alpha();
  auto& verdicts = out.report.verdicts;
  verdicts.push_back(make_verdict(7, "two_body_nonnegative", two.nonnegative, two.points.back().defect, 0.0, 1e-10));
  verdicts.push_back(make_verdict(7, "two_body_bounded", two.bounded, two.points.back().defect, two.points.back().bound,
                                  1e-10));
  const double slope = two.fit ? two.fit->exponent : NAN;
  verdicts.push_back(make_verdict(7, "two_body_slope", two.fit && slope <= -0.9 * alpha, slope, -0.9 * alpha, 0.0));
  verdicts.push_back(make_verdict(7, "three_body_nonnegative", three.nonnegative, three.points.back().defect, 0.0, 1e-10));
  verdicts.push_back(make_verdict(7, "three_body_monotone", three.monotone, three.points.back().defect, 0.0, 0.0));
  const double ratio = three.points.back().defect / three.points.front().defect;
  verdicts.push_back(make_verdict(7, "three_body_final_over_first", ratio < 0.1, ratio, 0.0, 0.1));
  return out;
}

Output run_hartree_collapse(const RunConfig& cfg) {
  const auto& ref = townes_reference();
  const KernelPair kernels = kernels_from(cfg);
  const CartesianGrid2D grid = grid_from(cfg);
  const SolverOptions opts = solver_options(cfg);
  const int max_points = checked_int(cfg, "max-points", 16, 1 << 14);
  const double eta = cfg.real("eta");
  Output out;
  Table t{"hartree_collapse.csv",
          {"index", "N", "ell", "a", "b", "energy", "coefficient", "predicted", "h1_distance", "iterations", "converged"},
          {}};
  Series coef{"", {}};
  double predicted = 0.0;
  std::vector<HartreeScanPoint> points;
  std::string x_label;
  if (geometry_from(cfg) == Geometry::Trapped) {
    HartreeCollapseSpec spec{CollapseSpec{cfg.real("zeta"), cfg.real("s"), ref.constants,
                                          geometric(cfg.real("ell-start"), cfg.real("ell-factor"),
                                                    checked_int(cfg, "steps", 1, 1000))},
                             kernels, eta};
    points = hartree_collapse_scan(spec, grid, opts, max_points);
    predicted = predicted_coefficient(spec.base.zeta, spec.base.s);
    coef.label = "E_H / (Q_s ell^s)";
    x_label = "ell";
    for (const auto& p : points) coef.points.emplace_back(p.point.ell, p.point.coefficient);
  } else {
    const HomogHartreeScan scan = homog_hartree_scan(cfg.real("a-ratio") * ref.constants.a_star, cfg.reals("n-list"),
                                                     kernels, eta, grid, opts, max_points);
    points = scan.points;
    predicted = 1.0;
    coef.label = "b G_H / G_NLS(a, 1)";
    x_label = "N";
    for (const auto& p : points) coef.points.emplace_back(p.n, p.point.coefficient);
  }
  for (const auto& p : points) {
    const auto& c = p.point;
    t.rows.push_back({fmt(c.index), fmt(p.n), fmt(c.ell), fmt(c.a), fmt(c.b), fmt(c.energy), fmt(c.coefficient),
                      fmt(predicted), fmt(c.h1_distance), fmt(c.iterations), fmt(c.converged)});
    out.report.points.push_back(c);
  }
  out.report.tables.push_back(std::move(t));
  out.plots.push_back({"hartree_collapse.svg",
                       Plot{"Hartree collapse", x_label, "energy coefficient", true, false, {coef},
                            {{"predicted", predicted}}}});
  return out;
}

}  // namespace

std::string owning_module(const std::string& command) {
  if (command == "townes") return "townes";
  if (command == "gs" || command == "phase" || command == "collapse" || command == "homog") return "nls";
  if (command == "hartree" || command == "lemma" || command == "hartree-collapse") return "hartree";
  throw ConfigError("unknown command '" + command + "'");
}

ScanReport run(const RunConfig& config) {
  const std::string& cmd = config.command();
  Output out;
  if (cmd == "townes") {
    out = run_townes(config);
  } else if (cmd == "gs") {
    out = run_gs(config);
  } else if (cmd == "phase") {
    out = run_phase(config);
  } else if (cmd == "collapse") {
    out = run_collapse(config);
  } else if (cmd == "homog") {
    out = run_homog(config);
  } else if (cmd == "hartree") {
    out = run_hartree(config);
  } else if (cmd == "lemma") {
    out = run_lemma(config);
  } else if (cmd == "hartree-collapse") {
    out = run_hartree_collapse(config);
  } else {
    throw ConfigError("unknown command '" + cmd + "'");
  }

  ScanReport& report = out.report;
  report.command = cmd;
  const std::filesystem::path dir = config.output_dir();
  std::filesystem::create_directories(dir);
  for (const auto& t : report.tables) {
    write_csv(t, dir / t.name);
    report.files.push_back(dir / t.name);
  }
  if (report.fit) {
    const Table fit{"fit.csv",
                    {"exponent", "prefactor", "r_squared"},
                    {{fmt(report.fit->exponent), fmt(report.fit->prefactor), fmt(report.fit->r_squared)}}};
    write_csv(fit, dir / fit.name);
    report.files.push_back(dir / fit.name);
  }
  if (config.flag("svg")) {
    for (const auto& [name, plot] : out.plots) {
      emit_svg(plot, dir / name);
      report.files.push_back(dir / name);
    }
  }
  {
    std::ofstream manifest(dir / "manifest.cfg", std::ios::binary);
    if (!manifest) throw Error("cannot write " + (dir / "manifest.cfg").string());
    manifest << config.manifest();
    report.files.push_back(dir / "manifest.cfg");
  }
  write_verdicts(report.verdicts, dir / "verdicts.jsonl");
  report.files.push_back(dir / "verdicts.jsonl");
  return report;
}

}  // namespace cqnls
