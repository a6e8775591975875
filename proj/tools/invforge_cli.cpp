// invforge — symbolic engine for scalar Riemannian curvature invariants.
// Subcommands wrap the library operations 1:1; --json emits the canonical
// serialization. Exit codes: 0 success / identity verified, 1 verified false,
// 2 usage or form errors.

#include <CLI11.hpp>
#include <atomic>
#include <cstdlib>
#include <iostream>
#include <thread>

#include "invforge/conformal.hpp"
#include "invforge/curvature.hpp"
#include "invforge/flatten.hpp"
#include "invforge/lang.hpp"
#include "invforge/ops.hpp"
#include "invforge/pipeline.hpp"
#include "invforge/relations.hpp"
#include "invforge/rewrite.hpp"
#include "invforge/serialize.hpp"
#include "invforge/solver.hpp"
#include "invforge/transport.hpp"

using namespace invforge;

namespace {

struct Common {
  std::string mode = "graded";
  long long dim = 0;  // 0 = symbolic n
  bool json = false;
  uint64_t seed = 17;

  Mode term_mode() const { return mode == "exact" ? Mode::Exact : Mode::Graded; }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--mode", c.mode, "index mode: exact|graded")
      ->check(CLI::IsMember({"exact", "graded"}));
  cmd->add_option("--dim", c.dim, "substitute an integer dimension n >= 4");
  cmd->add_flag("--json", c.json, "emit canonical JSON");
  cmd->add_option("--seed", c.seed, "random seed (INVFORGE_SEED overrides the default)");
}

LinearCombination at_dimension(const LinearCombination& lc, long long n) {
  LinearCombination out;
  for (const auto& [k, e] : lc.terms()) {
    BigRat v = e.coeff.at_dimension(n);
    if (!v.is_zero()) out.add(e.term, DimensionCoefficient(v));
  }
  return out;
}

void print_combination(const LinearCombination& lc, const Common& c) {
  LinearCombination shown = c.dim >= 4 ? at_dimension(lc, c.dim) : lc;
  if (c.json)
    std::cout << to_json(shown, 2) << "\n";
  else
    std::cout << print_expression(absorb_traces(shown)) << "\n";
}

uint64_t env_seed(uint64_t fallback) {
  if (const char* s = std::getenv("INVFORGE_SEED")) return std::strtoull(s, nullptr, 10);
  return fallback;
}

int run_verify_suite(int jobs, uint64_t seed);

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"invforge — contractions of curvature: canonical forms, conformal variation, divergence solving"};
  app.require_subcommand(1);

  Common c;
  std::string expr, expr2, form = "ens", label = "phi1", psi = "psi";
  int order = 1, threshold = 0, rank = 1, riemann = 0, min_jet = 1, jobs = 1;
  int sigma = 3, alpha = 1, jet_order = 4, graded_degree = -1, free_ordinal = 0;
  std::vector<std::string> jets;
  bool ups_excluding = false, dprime = false;
  bool acceptable = false;

  auto add_expr = [&](CLI::App* cmd) {
    cmd->add_option("expr", expr, "expression, e.g. \"contr(R(a,b,c,d)*R(a,b,c,d))\"")
        ->required();
  };

  CLI::App* canon = app.add_subcommand("canon", "canonical form of a combination");
  add_expr(canon);
  add_common(canon, c);

  CLI::App* norm = app.add_subcommand("normalize", "normalized / W-normalized form");
  add_expr(norm);
  norm->add_option("--form", form, "target form: ens|w")->check(CLI::IsMember({"ens", "w"}));
  add_common(norm, c);

  CLI::App* expw = app.add_subcommand("expand-weyl", "expand Weyl/Schouten/Cotton factors");
  add_expr(expw);
  add_common(expw, c);

  CLI::App* conf = app.add_subcommand("conf-var", "conformal variation (Image^d)");
  add_expr(conf);
  conf->add_option("--order", order, "derivative order d")->required();
  conf->add_option("--psi", psi, "conformal function label");
  add_common(conf, c);

  CLI::App* xd = app.add_subcommand("xdiv", "Xdiv over a free index");
  add_expr(xd);
  xd->add_option("--index", free_ordinal, "free index ordinal (default 0)");
  xd->add_flag("--ups-excluding", ups_excluding, "skip nabla(ups) factors");
  add_common(xd, c);

  CLI::App* wfy = app.add_subcommand("weylify", "Weylify (Def. 5.3)");
  add_expr(wfy);
  add_common(wfy, c);

  CLI::App* rfy = app.add_subcommand("riccify", "Riccify (Def. 5.6)");
  add_expr(rfy);
  rfy->add_flag("--dprime", dprime, "use the Riccify'' variant");
  add_common(rfy, c);

  CLI::App* ers = app.add_subcommand("erase", "Erase a nabla(phi) factor (Def. 6.1)");
  add_expr(ers);
  ers->add_option("--label", label, "function label to erase")->required();
  add_common(ers, c);

  CLI::App* sub = app.add_subcommand("subomega", "Sub_omega (Lemma 6.2)");
  add_expr(sub);
  sub->add_option("--label", label, "label for the new function")->required();
  add_common(sub, c);

  CLI::App* inf = app.add_subcommand("inflate", "nabla(ups) inflation (Def. 5.11)");
  add_expr(inf);
  add_common(inf, c);

  CLI::App* sd = app.add_subcommand("solve-div", "realize a combination as an Xdiv");
  add_expr(sd);
  sd->add_option("--threshold", threshold, "graded length threshold L")->required();
  sd->add_option("--rank", rank, "candidate rank (default 1)");
  sd->add_option("--riemann", riemann, "candidate Riemann factor count");
  sd->add_option("--jets", jets, "candidate jet labels");
  sd->add_option("--min-jet-derivs", min_jet, "minimum jet derivatives (default 1)");
  sd->add_flag("--acceptable", acceptable, "enforce (5.29) acceptability");
  add_common(sd, c);

  CLI::App* pg = app.add_subcommand("check-pregiade", "main algebraic proposition checker");
  pg->add_option("--l1", expr, "rank-alpha fields (expression)")->required();
  pg->add_option("--l2", expr2, "higher-rank fields (expression)");
  pg->add_option("--sigma", sigma, "length sigma")->required();
  pg->add_option("--alpha", alpha, "free-index count alpha")->required();
  pg->add_option("--riemann", riemann, "conclusion candidate Riemann count");
  pg->add_option("--jets", jets, "conclusion candidate jet labels");
  add_common(pg, c);

  CLI::App* ev = app.add_subcommand("eval", "numeric evaluation on a seeded jet");
  add_expr(ev);
  ev->add_option("--order", jet_order, "metric jet order (default 4)");
  ev->add_option("--graded", graded_degree, "extract the eps^d coefficient");
  add_common(ev, c);

  CLI::App* vs = app.add_subcommand("verify-suite", "run the numeric verification battery");
  vs->add_option("--jobs", jobs, "worker parallelism");
  add_common(vs, c);

  CLI11_PARSE(app, argc, argv);
  c.seed = env_seed(c.seed);

  try {
    if (canon->parsed()) {
      LinearCombination lc = parse_expression(expr, c.term_mode());
      print_combination(lc, c);
      return 0;
    }
    if (norm->parsed()) {
      LinearCombination lc = parse_expression(expr, c.term_mode());
      RewriteReport r =
          normalize(lc, form == "w" ? NormalForm::WNormalized : NormalForm::Ens);
      print_combination(r.output, c);
      if (!c.json && !r.corrections.empty())
        std::cout << "corrections: " << print_expression(r.corrections) << "\n";
      if (!c.json)
        for (auto& id : r.rules_applied) std::cout << "rule: " << id << "\n";
      return 0;
    }
    if (expw->parsed()) {
      LinearCombination lc = parse_expression(expr, c.term_mode());
      print_combination(expand_curvature(lc), c);
      return 0;
    }
    if (conf->parsed()) {
      LinearCombination lc = parse_expression(expr, Mode::Graded);
      LinearCombination img = image_conformal(lc, order, psi);
      LinearCombination shown = to_graded(img);
      print_combination(shown, c);
      bool zero = c.dim >= 4 ? at_dimension(shown, c.dim).empty() : shown.empty();
      return zero ? 0 : 1;
    }
    if (xd->parsed()) {
      LinearCombination lc = parse_expression(expr, c.term_mode());
      LinearCombination out = xdiv(lc, free_ordinal,
                                   ups_excluding ? XdivVariant::UpsilonExcluding
                                                 : XdivVariant::Standard);
      if (out.empty()) std::cout << "note: no allowed divergence target\n";
      print_combination(out, c);
      return 0;
    }
    if (wfy->parsed()) {
      print_combination(weylify(parse_expression(expr, c.term_mode())), c);
      return 0;
    }
    if (rfy->parsed()) {
      LinearCombination lc = parse_expression(expr, c.term_mode());
      print_combination(dprime ? riccify_dprime(lc) : riccify(lc), c);
      return 0;
    }
    if (ers->parsed()) {
      print_combination(erase(parse_expression(expr, c.term_mode()), label), c);
      return 0;
    }
    if (sub->parsed()) {
      print_combination(sub_omega(parse_expression(expr, c.term_mode()), label), c);
      return 0;
    }
    if (inf->parsed()) {
      print_combination(inflate_upsilon(parse_expression(expr, c.term_mode())), c);
      return 0;
    }
    if (sd->parsed()) {
      LinearCombination lhs = to_graded(parse_expression(expr, Mode::Graded));
      ShapeSpec spec;
      spec.weight = lhs.weight() + 1;
      spec.rank = rank;
      spec.riemann_factors = riemann;
      spec.jet_labels = jets;
      spec.acceptable = acceptable;
      spec.min_jet_derivs = acceptable ? 2 : min_jet;
      SolveResult r = solve_divergence(lhs, spec, threshold);
      if (c.json) {
        std::cout << to_json(r, 2) << "\n";
      } else if (r.success) {
        std::cout << "realized vector field:\n" << print_expression(r.realized) << "\n";
      } else {
        std::cout << "no solution; residual:\n"
                  << print_expression(absorb_traces(r.residual)) << "\n";
      }
      return r.success ? 0 : 1;
    }
    if (pg->parsed()) {
      PregiadeInstance inst;
      inst.l1_fields = parse_expression(expr, Mode::Graded);
      if (!expr2.empty()) inst.l2_fields.push_back(parse_expression(expr2, Mode::Graded));
      inst.sigma = sigma;
      inst.alpha = alpha;
      inst.conclusion_candidates.weight = inst.l1_fields.weight() + 1;
      inst.conclusion_candidates.rank = alpha + 1;
      inst.conclusion_candidates.riemann_factors = riemann;
      inst.conclusion_candidates.jet_labels = jets;
      SolveResult r = check_pregiade_instance(inst);
      if (c.json)
        std::cout << to_json(r, 2) << "\n";
      else
        std::cout << (r.success ? "certified" : "not realized") << "\n";
      return r.success ? 0 : 1;
    }
    if (ev->parsed()) {
      if (c.dim < 4) throw Error("eval requires --dim n >= 4");
      LinearCombination lc = parse_expression(expr, c.term_mode());
      std::vector<std::string> labels;
      for (const auto& [k, e] : lc.terms())
        for (const Factor& f : e.term.factors)
          if (f.kind == FactorKind::FunctionJet && !f.label.empty())
            labels.push_back(f.label);
      std::sort(labels.begin(), labels.end());
      labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
      JetPoint jp = JetPoint::random(c.seed, (int)c.dim, jet_order, labels, {"v"});
      CurvatureJets cj(jp);
      EpsPoly v = evaluate(lc, cj);
      if (graded_degree >= 0)
        std::cout << v[graded_degree] << "\n";
      else
        std::cout << v.value_sum() << "\n";
      return 0;
    }
    if (vs->parsed()) return run_verify_suite(jobs, c.seed);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

namespace {

int run_verify_suite(int jobs, uint64_t seed) {
  struct Check {
    std::string name;
    std::function<bool()> run;
  };
  std::vector<Check> checks;

  for (int n : {4, 5, 6, 7}) {
    checks.push_back({"weyl-transformation-2.5.n" + std::to_string(n), [n, seed] {
      JetPoint jp = JetPoint::random(seed + n, n, 4, {"phi"});
      CurvatureJets cj(jp);
      CurvatureJets cj2(jp.conformally_scaled("phi"));
      NumTensor w1 = cj.factor_tensor({FactorKind::Weyl, 0, ""}, n);
      NumTensor w2 = cj2.factor_tensor({FactorKind::Weyl, 0, ""}, n);
      EpsPoly p0 = jp.functions.at("phi").at_zero();
      EpsPoly e2p(1.0), pw(1.0);
      double fact = 1;
      for (int k = 1; k <= EpsPoly::kMaxDeg; ++k) {
        pw = pw * p0;
        fact *= k;
        e2p += (std::pow(2.0, k) / fact) * pw;
      }
      for (size_t i = 0; i < w1.size(); ++i) w1.flat(i) = e2p * w1.flat(i);
      return tensor_rel_error(w1, w2) < 1e-9;
    }});
  }
  checks.push_back({"numeric-bianchi", [seed] {
    JetPoint jp = JetPoint::random(seed + 101, 5, 4);
    CurvatureJets cj(jp);
    NumTensor r = cj.riemann().at_zero();
    double e1 = 0, scale = 0;
    const int n = 5;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            scale = std::max(scale, r.at({i, j, k, l}).max_abs());
            EpsPoly b = r.at({i, j, k, l}) + r.at({i, k, l, j}) + r.at({i, l, j, k});
            e1 = std::max(e1, b.max_abs());
          }
    return e1 / scale < 1e-10;
  }});
  checks.push_back({"cotton-relation-2.6", [] {
    LinearCombination rel = parse_expression(
        "pcontr(j,k,l | nabla(i) W(i,j,k,l)) - (3-n) * pcontr(j,k,l | Cot(j,k,l))");
    LinearCombination closed;
    for (const auto& [k, e] : rel.terms()) {
      Term t = e.term;
      int base = (int)t.factors.size();
      int s = 0;
      std::vector<SlotRef> frees = t.free;
      t.free.clear();
      for (SlotRef fr : frees) {
        t.factors.push_back({FactorKind::FunctionJet, 1, "f" + std::to_string(s)});
        t.edges.push_back({fr, {base + s, 0}});
        ++s;
      }
      closed.add(t, e.coeff);
    }
    return reduce_bianchi(expand_flat(closed)).empty();
  }});

  std::atomic<size_t> next{0};
  std::atomic<int> failures{0};
  std::vector<std::pair<std::string, bool>> results(checks.size());
  auto worker = [&] {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= checks.size()) return;
      bool ok = false;
      try {
        ok = checks[i].run();
      } catch (...) {
        ok = false;
      }
      results[i] = {checks[i].name, ok};
      if (!ok) failures.fetch_add(1);
    }
  };
  std::vector<std::thread> pool;
  for (int j = 0; j < std::max(1, jobs); ++j) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  for (auto& [name, ok] : results)
    std::cout << (ok ? "pass" : "FAIL") << "  " << name << "\n";
  std::cout << (failures == 0 ? "verify-suite: all checks passed\n"
                              : "verify-suite: FAILURES\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace
