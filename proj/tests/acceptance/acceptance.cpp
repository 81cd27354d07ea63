// Acceptance suite: one line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "hyperrag/hyperrag.hpp"
#include "support/fixtures.hpp"
#include "support/process.hpp"

using namespace hyperrag;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Vector gaussian(std::mt19937_64& rng, std::size_t d) {
  std::normal_distribution<double> g;
  Vector v(d);
  for (double& x : v) x = g(rng);
  return v;
}

Vector rescaled(Vector v, double length) {
  const double n = norm(v);
  for (double& x : v) x *= length / n;
  return v;
}

// --- geometry -------------------------------------------------------------

Outcome geometry_kernel() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> len(0.0, 3.0);
  double round_trip = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double c = std::array<double, 3>{0.5, 1.0, 2.0}[i % 3];
    const Vector v = rescaled(gaussian(rng, 8), len(rng));
    const auto back = log_map_origin(exp_map_origin(TangentVector{v}, Curvature(c)));
    for (std::size_t j = 0; j < v.size(); ++j) round_trip = std::max(round_trip, std::abs(back.coords[j] - v[j]));
  }
  bool symmetric = true;
  double triangle_excess = 0.0;
  std::uniform_real_distribution<double> radius(0.0, 0.95);
  auto point = [&] { return HyperbolicPoint(rescaled(gaussian(rng, 5), radius(rng)), Curvature(1.0)); };
  for (int i = 0; i < 200; ++i) {
    const auto a = point(), b = point(), c = point();
    symmetric = symmetric && geodesic_distance(a, b) == geodesic_distance(b, a);
    triangle_excess =
        std::max(triangle_excess, geodesic_distance(a, c) - geodesic_distance(a, b) - geodesic_distance(b, c));
  }
  const double ln9_err = std::abs(geodesic_distance(HyperbolicPoint({0.5, 0.0}, Curvature(1.0)),
                                                    HyperbolicPoint({-0.5, 0.0}, Curvature(1.0))) -
                                  std::log(9.0));
  const double ln3_err = std::abs(radial_distance(HyperbolicPoint({0.5, 0.0}, Curvature(1.0))) - std::log(3.0));
  const double secs = seconds_since(t0);
  const bool pass = round_trip < 1e-9 && symmetric && triangle_excess <= 1e-9 && ln9_err < 1e-12 &&
                    ln3_err < 1e-12 && secs < 1.0;
  return {pass, fmt("round-trip max err %.2e, triangle excess %.2e, ln9/ln3 err %.1e/", round_trip,
                    triangle_excess, ln9_err) +
                    fmt("%.1e, ", ln3_err) + (symmetric ? "symmetric" : "ASYMMETRIC") + fmt(", %.3f s", secs)};
}

// --- projection -----------------------------------------------------------

Outcome projection_layer() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double norm_err = 0.0;
  double worst_radius = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const std::array<double, 3> cs = {0.5, 1.0, 2.0};
    const double c = cs[i % 3];
    const double alpha = 0.05 + 0.45 * unit(rng);
    const double beta = (1.0 - alpha) * (0.05 + 0.95 * unit(rng));
    const ProjectionConfig cfg{16, alpha, beta, c};
    const auto params = ProjectionParams::initialize(cfg, 1000 + i, 1.0);
    const Vector z = gaussian(rng, 16);
    const double dv = unit(rng);
    const Vector aligned = radial_align(z, DepthScore{dv}, params);
    norm_err = std::max(norm_err, std::abs(norm(aligned) - (alpha + beta * dv)));
    const auto p = project_node(z, static_cast<NodeKind>(i % 3), params);
    worst_radius = std::max(worst_radius, std::sqrt(c) * norm(p.coords()));
  }
  const bool pass = norm_err < 1e-12 && worst_radius <= 1.0 - 1e-5;
  return {pass, fmt("max |norm - (a + b dv)| = %.2e, max sqrt(c)|z| = %.9f", norm_err, worst_radius)};
}

// --- training -------------------------------------------------------------

Outcome training() {
  const auto t0 = Clock::now();
  auto idx = build_index(fixtures::toy_corpus(), IndexBuildConfig{}, StubExtractor{}, "stub", HashingEncoder());
  const std::size_t np = idx.store.passages().size(), nf = idx.store.facts().size();
  TrainConfig tc;  // seed 42, 200 full-batch epochs
  const TrainResult result = train_index(idx, ProjectionConfig{}, tc);
  const double initial = result.loss_trace.front();
  const double final_loss = result.loss_trace.back();

  // Finite differences at the initial parameters on the first epoch's terms,
  // keeping only terms that sit well away from the hinge kink.
  const auto passages = idx.vectors(NodeKind::passage);
  const auto facts = idx.vectors(NodeKind::fact);
  auto params = ProjectionParams::initialize(ProjectionConfig{}, tc.seed);
  std::mt19937_64 term_rng(tc.seed ^ 0x6a09e667f3bcc908ULL);
  const auto all_terms = sample_terms(Associations::from_store(idx.store), 1, term_rng);
  std::vector<Vector> pp, fp;
  for (const auto& v : passages) pp.push_back(project_node(v, NodeKind::passage, params).vector());
  for (const auto& v : facts) fp.push_back(project_node(v, NodeKind::fact, params).vector());
  const double c = params.curvature().value();
  std::vector<ContrastiveTerm> terms;
  for (const auto& t : all_terms) {
    const bool from_passage = t.anchor_kind == NodeKind::passage;
    const Vector& a = from_passage ? pp[t.anchor] : fp[t.anchor];
    const Vector& pos = from_passage ? fp[t.positive] : pp[t.positive];
    const Vector& neg = from_passage ? fp[t.negative] : pp[t.negative];
    const double value = poincare::distance(a, pos, c) - poincare::distance(a, neg, c) + tc.margin;
    if (std::abs(value) > 1e-3) terms.push_back(t);
  }
  const auto analytic = contrastive_objective(params, passages, facts, terms, tc.margin, true);
  std::mt19937_64 pick_rng(42);
  const double h = 1e-5;
  double worst = 0.0;
  std::set<std::uint64_t> picked;
  while (picked.size() < 20) picked.insert(uniform_index(pick_rng, params.flat().size()));
  for (std::uint64_t i : picked) {
    const double saved = params.flat()[i];
    params.flat()[i] = saved + h;
    const double up = contrastive_objective(params, passages, facts, terms, tc.margin, false).loss;
    params.flat()[i] = saved - h;
    const double down = contrastive_objective(params, passages, facts, terms, tc.margin, false).loss;
    params.flat()[i] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double a = analytic.gradient[i];
    worst = std::max(worst, std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6}));
  }
  const double secs = seconds_since(t0);
  const bool pass = np == 20 && nf == 60 && result.loss_trace.size() == 200 && final_loss < 0.8 * initial &&
                    worst < 1e-4 && secs < 60.0;
  return {pass, fmt("%.0f passages/%.0f facts, loss %.4f -> %.4f", double(np), double(nf), initial, final_loss) +
                    fmt(" (ratio %.3f), FD max rel err %.2e on 20 params (%.0f terms), ", final_loss / initial,
                        worst, double(terms.size())) +
                    fmt("%.1f s", secs)};
}

// --- PPR ------------------------------------------------------------------

HeterogeneousGraph random_graph(std::mt19937_64& rng) {
  const std::size_t np = 1 + uniform_index(rng, 100);
  const std::size_t ne = 2 + uniform_index(rng, 99);
  const std::size_t n = np + ne;
  std::vector<Edge> edges;
  auto random_entity = [&] { return static_cast<std::uint32_t>(np + uniform_index(rng, ne)); };
  // Every node gets at least one edge, then extra random edges.
  for (std::uint32_t v = 0; v < n; ++v) {
    if (v < np) {
      edges.push_back(Edge{v, random_entity(), 1.0, EdgeKind::passage_entity});
    } else {
      std::uint32_t w = random_entity();
      while (w == v) w = random_entity();
      edges.push_back(Edge{v, w, 1.0 + static_cast<double>(uniform_index(rng, 3)), EdgeKind::entity_entity});
    }
  }
  const std::size_t extra = uniform_index(rng, 2 * n);
  for (std::size_t k = 0; k < extra; ++k) {
    const auto a = static_cast<std::uint32_t>(uniform_index(rng, n));
    if (a < np) {
      edges.push_back(Edge{a, random_entity(), 1.0, EdgeKind::passage_entity});
    } else {
      const std::uint32_t b = random_entity();
      if (a == b) continue;
      edges.push_back(Edge{a, b, 1.0, uniform_index(rng, 4) == 0 ? EdgeKind::synonymy : EdgeKind::entity_entity});
    }
  }
  return HeterogeneousGraph(np, ne, std::move(edges));
}

// Dense row-stochastic W built straight from the edge list.
std::vector<Vector> dense_transition(const HeterogeneousGraph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<Vector> w(n, Vector(n, 0.0));
  for (const Edge& e : g.edges()) {
    w[e.u][e.v] += e.weight;
    w[e.v][e.u] += e.weight;
  }
  for (auto& row : w) {
    double s = 0.0;
    for (double x : row) s += x;
    if (s > 0.0) {
      for (double& x : row) x /= s;
    }
  }
  return w;
}

Vector dense_solve_ppr(const std::vector<Vector>& w, const Vector& s, double damping) {
  const std::size_t n = s.size();
  std::vector<Vector> a(n, Vector(n + 1, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i][j] = (i == j ? 1.0 : 0.0) - (1.0 - damping) * w[j][i];
    a[i][n] = damping * s[i];
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    std::swap(a[col], a[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (std::size_t k = col; k <= n; ++k) a[r][k] -= f * a[col][k];
    }
  }
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = a[i][n] / a[i][i];
  return x;
}

Outcome ppr_fixed_point() {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst_residual = 0.0, worst_mass = 0.0;
  std::size_t max_nodes = 0;
  const RetrievalConfig rc;
  for (int g = 0; g < 50; ++g) {
    const auto graph = random_graph(rng);
    const std::size_t n = graph.num_nodes();
    max_nodes = std::max(max_nodes, n);
    SeedDistribution seed;
    seed.weights.assign(n, 0.0);
    double total = 0.0;
    for (std::size_t k = 0; k < 1 + uniform_index(rng, 5); ++k) {
      const double m = unit(rng);
      seed.weights[uniform_index(rng, n)] += m;
      total += m;
    }
    for (double& x : seed.weights) x /= total;
    const double damping = 0.15 + 0.7 * unit(rng);
    const auto pi = ppr(seed, row_normalize(graph), damping, rc.tol, rc.max_iter);
    const auto w = dense_transition(graph);
    double residual = 0.0, mass = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double flow = 0.0;
      for (std::size_t i = 0; i < n; ++i) flow += pi.probabilities[i] * w[i][j];
      residual += std::abs(pi.probabilities[j] - (damping * seed.weights[j] + (1.0 - damping) * flow));
      mass += pi.probabilities[j];
    }
    worst_residual = std::max(worst_residual, residual);
    worst_mass = std::max(worst_mass, std::abs(mass - 1.0));
  }
  const HeterogeneousGraph path(0, 3, {Edge{0, 1, 1.0, EdgeKind::entity_entity}, Edge{1, 2, 1.0, EdgeKind::entity_entity}});
  SeedDistribution s;
  s.weights = {1.0, 0.0, 0.0};
  const auto pi = ppr(s, row_normalize(path), 0.5, rc.tol, rc.max_iter);
  const auto oracle = dense_solve_ppr(dense_transition(path), s.weights, 0.5);
  double linf = 0.0;
  for (std::size_t i = 0; i < 3; ++i) linf = std::max(linf, std::abs(pi.probabilities[i] - oracle[i]));
  const bool pass = worst_residual < 1e-8 && worst_mass < 1e-9 && linf < 1e-8 && max_nodes <= 200;
  return {pass, fmt("50 graphs (<= %.0f nodes): max residual %.2e, max |sum - 1| %.2e; path L_inf %.2e",
                    double(max_nodes), worst_residual, worst_mass, linf)};
}

// --- fusion ---------------------------------------------------------------

Outcome fusion_algebra() {
  const bool hand = hybrid_score(0, 0) == 3.0 && hybrid_score(0, std::nullopt) == 1.0 && hybrid_score(1, 2) == 1.0;
  std::size_t violations = 0;
  for (std::size_t i = 0; i < 100; ++i) {
    for (std::size_t j = 0; j < 100; ++j) {
      const double both = hybrid_score(i, j);
      if (!(both > hybrid_score(i, std::nullopt) && both > hybrid_score(std::nullopt, j))) ++violations;
      if (i + 1 < 100 && !(both > hybrid_score(i + 1, j))) ++violations;
      if (j + 1 < 100 && !(both > hybrid_score(i, j + 1))) ++violations;
    }
  }
  return {hand && violations == 0,
          std::string(hand ? "3.0/1.0/1.0 exact" : "HAND VALUES DIFFER") +
              fmt(", %.0f dominance/monotonicity violations over ranks 0..99", double(violations))};
}

// --- hub/leaf ablation ----------------------------------------------------

Outcome ablation() {
  const auto t0 = Clock::now();
  const auto hl = fixtures::hub_leaf_corpus();
  const HashingEncoder enc;
  auto idx = build_index(hl.docs, IndexBuildConfig{}, StubExtractor{}, "stub", enc);
  TrainConfig tc;
  tc.seed = 42;
  train_index(idx, ProjectionConfig{}, tc);
  const RetrievalEngine engine(idx, enc);
  const auto report = run_eval(parse_dataset_jsonl(fixtures::dataset_jsonl(hl.queries)), engine, EvalConfig{5, true},
                               idx.store);
  const double re = report["mean_recall"]["euclidean"];
  const double rh = report["mean_recall"]["hyperbolic"];
  const double rf = report["mean_recall"]["fused"];
  std::size_t hub_degree = 0;
  for (auto d : idx.graph.entity_passage_degree()) hub_degree = std::max<std::size_t>(hub_degree, d);
  const double secs = seconds_since(t0);
  const bool pass = hub_degree == 30 && report["evaluated"] == 10 && rf >= re && rh >= 0.5 * re && secs < 120.0;
  return {pass, fmt("Recall@5 euclidean %.2f, hyperbolic %.2f, fused %.2f", re, rh, rf) +
                    fmt(" (hub degree %.0f), %.1f s", double(hub_degree), secs)};
}

// --- determinism ----------------------------------------------------------

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = io::read_file(e.path().string());
  return out;
}

Outcome determinism() {
  const auto hl = fixtures::hub_leaf_corpus();
  fixtures::TempDir work("accept");
  io::write_file((work.path() / "corpus.jsonl").string(), fixtures::corpus_jsonl(hl.docs));
  io::write_file((work.path() / "data.jsonl").string(), fixtures::dataset_jsonl(hl.queries));
  std::vector<std::map<std::string, std::string>> indexes;
  std::vector<std::string> reports;
  for (int run = 0; run < 2; ++run) {
    const fs::path index = work.path() / ("index" + std::to_string(run));
    const fs::path report = work.path() / ("report" + std::to_string(run) + ".json");
    const fs::path config = work.path() / ("config" + std::to_string(run) + ".json");
    io::write_file(config.string(), nlohmann::json{{"corpus", (work.path() / "corpus.jsonl").string()},
                                                   {"index_dir", index.string()},
                                                   {"seed", 42}}
                                        .dump());
    const std::string cfg = "--config " + fixtures::shell_quote(config.string());
    const int a = fixtures::run_cli(cfg + " index").exit_code;
    const int b = fixtures::run_cli(cfg + " train").exit_code;
    const int c = fixtures::run_cli(cfg + " eval --dataset " +
                                    fixtures::shell_quote((work.path() / "data.jsonl").string()) + " --report " +
                                    fixtures::shell_quote(report.string()))
                      .exit_code;
    if (a != 0 || b != 0 || c != 0) {
      return {false, fmt("CLI exit codes index=%.0f train=%.0f eval=%.0f", a, b, c)};
    }
    indexes.push_back(snapshot(index));
    reports.push_back(io::read_file(report.string()));
  }
  const bool same_index = indexes[0] == indexes[1];
  const bool same_report = reports[0] == reports[1];
  return {same_index && same_report && indexes[0].size() == 7,
          fmt("%.0f index files ", double(indexes[0].size())) + (same_index ? "identical" : "DIFFER") +
              ", report " + (same_report ? "identical" : "DIFFERS")};
}

// --- metrics --------------------------------------------------------------

Outcome metrics() {
  const bool f1 = token_f1("barack obama", {"obama"}) == 2.0 / 3.0;
  const bool em = exact_match("The Eiffel Tower", {"eiffel tower"}) == 1 && exact_match("", {"eiffel tower"}) == 0 &&
                  exact_match("same", {"same"}) == 1;
  const std::vector<std::string> r = {"p1", "p9", "p8", "p7", "p6", "p2"};
  const bool recall = recall_at_k(r, {"p1"}, 5) == 1.0 && recall_at_k(r, {"p1", "p2"}, 5) == 0.5 &&
                      recall_at_k(r, {"p1"}, 0) == 0.0;
  return {f1 && em && recall, std::string("F1 2/3 ") + (f1 ? "exact" : "WRONG") + ", EM normalization " +
                                  (em ? "exact" : "WRONG") + ", Recall@k fixtures " + (recall ? "exact" : "WRONG")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"geometry kernel", geometry_kernel}, {"projection layer", projection_layer},
      {"training", training},               {"ppr", ppr_fixed_point},
      {"fusion algebra", fusion_algebra},   {"hub/leaf ablation", ablation},
      {"determinism", determinism},         {"metrics", metrics},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("[%s] %-18s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
