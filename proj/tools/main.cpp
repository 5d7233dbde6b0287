// Command-line front end: every analysis is a subcommand that writes
// plot-ready CSV files under --out and finishes with a manifest. Exit code
// 0 on success, 1 on usage or configuration errors, 2 when a verification
// invariant is violated.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "uaelab/blocks.hpp"
#include "uaelab/descriptor.hpp"
#include "uaelab/gradient_lab.hpp"
#include "uaelab/harness.hpp"
#include "uaelab/uae.hpp"

namespace fs = std::filesystem;
using namespace uaelab;

namespace {

#ifndef UAELAB_CORPUS_DIR
#define UAELAB_CORPUS_DIR "data/corpus"
#endif

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<int> split_ints(const std::string& s) {
  std::vector<int> out;
  for (const auto& tok : split_list(s)) out.push_back(std::stoi(tok));
  return out;
}

// Collects emitted files and writes the manifest last, so its presence
// signals a completed run.
struct Reporter {
  fs::path dir;
  std::string subcommand;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::string> files;

  Reporter(const std::string& out, std::string sub) : dir(out), subcommand(std::move(sub)) {
    fs::create_directories(dir);
  }

  void set(const std::string& k, const std::string& v) { config.emplace_back(k, v); }

  std::ofstream open_csv(const std::string& name, const std::string& header) {
    std::ofstream f(dir / name, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open output file: " + (dir / name).string());
    f << "# subcommand=" << subcommand;
    for (const auto& [k, v] : config) f << ' ' << k << '=' << v;
    f << '\n' << header << '\n';
    files.push_back(name);
    return f;
  }

  void write_manifest() {
    std::ofstream f(dir / "manifest.txt", std::ios::trunc);
    f << "subcommand=" << subcommand << '\n';
    for (const auto& [k, v] : config) f << k << '=' << v << '\n';
    f << "files=";
    for (std::size_t i = 0; i < files.size(); ++i) f << (i ? "," : "") << files[i];
    f << '\n';
  }
};

std::vector<UaeForm> select_forms(const std::string& list) {
  const auto names = split_list(list);
  if (names.empty()) throw std::invalid_argument("no forms selected");
  std::vector<UaeForm> forms;
  for (const auto& n : names) forms.push_back(form_by_name(n));
  return forms;
}

BlockKind parse_kind(const std::string& s) {
  if (s == "RB" || s == "rb") return BlockKind::rb;
  if (s == "CRB" || s == "crb") return BlockKind::crb;
  if (s == "DCRB" || s == "dcrb") return BlockKind::dcrb;
  if (s == "CRB*" || s == "CRBstar" || s == "crb_star") return BlockKind::crb_star;
  throw std::invalid_argument("unknown block kind '" + s +
                              "' (valid: RB, CRB, DCRB, CRBstar)");
}

std::string kind_file_tag(BlockKind k) {
  switch (k) {
    case BlockKind::rb: return "RB";
    case BlockKind::crb: return "CRB";
    case BlockKind::dcrb: return "DCRB";
    case BlockKind::crb_star: return "CRBstar";
  }
  return "unknown";
}

struct SubsetChoice {
  std::string name;
  FactorSubset subset;
};

std::vector<SubsetChoice> all_subsets() {
  return {
      {"alpha", {true, false, false}},
      {"beta", {false, true, false}},
      {"theta", {false, false, true}},
      {"beta+theta", {false, true, true}},
      {"alpha+theta", {true, false, true}},
      {"alpha+beta", {true, true, false}},
      {"alpha+beta+theta", {true, true, true}},
  };
}

// ---- uae ----------------------------------------------------------------

int cmd_uae(const std::string& corpus, const std::string& forms_list, const std::string& out,
            std::uint64_t seed, double tie_tol) {
  const auto descs = load_corpus(corpus);
  const auto forms = select_forms(forms_list);

  Reporter rep(out, "uae");
  rep.set("corpus", corpus);
  rep.set("forms", forms_list);
  rep.set("seed", std::to_string(seed));
  rep.set("tie_tol", fmt(tie_tol));

  {
    auto f = rep.open_csv("uae.csv", "form,module,phi");
    for (const auto& form : forms)
      for (const auto& d : descs)
        f << form.name << ',' << d.name << ',' << fmt(evaluate_uae(form, d)) << '\n';
  }
  const InvarianceReport inv = ranking_invariance(forms, descs, tie_tol);
  {
    auto f = rep.open_csv("ranking.csv", "form,rank,module,phi,tied_with_previous");
    for (const auto& form : forms) {
      const auto ranked = rank_modules(form, descs, tie_tol);
      for (std::size_t i = 0; i < ranked.size(); ++i)
        f << form.name << ',' << i + 1 << ',' << ranked[i].name << ',' << fmt(ranked[i].phi)
          << ',' << (ranked[i].tied_with_previous ? 1 : 0) << '\n';
    }
    f << "# ranking_invariant=" << (inv.invariant ? "true" : "false")
      << " conflicts=" << inv.conflicts.size() << '\n';
  }
  std::cout << "ranking invariance across " << forms.size()
            << " forms: " << (inv.invariant ? "holds" : "violated") << " (tie tolerance "
            << fmt(tie_tol) << ")\n";
  for (const auto& c : inv.conflicts) std::cout << "  conflict: " << c << '\n';
  rep.write_manifest();
  return 0;
}

// ---- ablate -------------------------------------------------------------

int cmd_ablate(const std::string& corpus, const std::string& forms_list,
               const std::string& only, const std::string& out, std::uint64_t seed) {
  const auto descs = load_corpus(corpus);
  const auto forms = select_forms(forms_list);
  std::vector<SubsetChoice> subsets;
  if (only.empty()) {
    subsets = all_subsets();
  } else {
    for (const auto& s : all_subsets())
      if (s.name == only) subsets.push_back(s);
    if (subsets.empty())
      throw std::invalid_argument("unknown factor subset '" + only +
                                  "' (use e.g. alpha, beta+theta, alpha+beta+theta)");
  }

  Reporter rep(out, "ablate");
  rep.set("corpus", corpus);
  rep.set("forms", forms_list);
  rep.set("only", only.empty() ? "all" : only);
  rep.set("seed", std::to_string(seed));

  auto f = rep.open_csv("ablation.csv", "form,module,subset,phi");
  for (const auto& form : forms)
    for (const auto& s : subsets)
      for (const auto& d : descs)
        f << form.name << ',' << d.name << ',' << s.name << ','
          << fmt(ablate(form, d, s.subset)) << '\n';
  rep.write_manifest();
  return 0;
}

// ---- sensitivity ----------------------------------------------------------

int cmd_sensitivity(const std::string& corpus, const std::string& forms_list,
                    const std::string& out, std::uint64_t seed) {
  const auto descs = load_corpus(corpus);
  const auto forms = select_forms(forms_list);

  Reporter rep(out, "sensitivity");
  rep.set("corpus", corpus);
  rep.set("forms", forms_list);
  rep.set("seed", std::to_string(seed));

  for (const auto& form : forms) {
    auto f = rep.open_csv("sensitivity_" + form.name + ".csv",
                          "module,S_alpha,S_beta,S_theta,C_alpha,C_beta,C_theta");
    for (const auto& d : descs) {
      const SensitivityReport s = sensitivity(form, d);
      f << d.name << ',' << fmt(s.s_alpha) << ',' << fmt(s.s_beta) << ',' << fmt(s.s_theta)
        << ',' << fmt(s.c_alpha) << ',' << fmt(s.c_beta) << ',' << fmt(s.c_theta) << '\n';
      const double sum = s.c_alpha + s.c_beta + s.c_theta;
      const double target = s.v_full - s.v_empty;
      std::cout << form.name << ' ' << d.name << ": sum_C=" << fmt(sum)
                << " v_full-v_empty=" << fmt(target)
                << (std::abs(sum - target) <= 1e-9 ? " ok" : " MISMATCH") << '\n';
    }
  }
  rep.write_manifest();
  return 0;
}

// ---- verify ---------------------------------------------------------------

int cmd_verify(const std::string& kind, std::size_t trials, bool trials_given,
               std::uint64_t seed, const std::string& out) {
  if (kind != "spectral" && kind != "jacobian" && kind != "bounds" && kind != "all")
    throw std::invalid_argument("unknown verify kind '" + kind +
                                "' (valid: spectral, jacobian, bounds, all)");
  if (trials_given && trials == 0) throw std::invalid_argument("trials must be >= 1");

  Reporter rep(out, "verify");
  rep.set("kind", kind);
  rep.set("trials", trials_given ? std::to_string(trials) : "default");
  rep.set("seed", std::to_string(seed));

  bool invariant_failed = false;

  if (kind == "spectral" || kind == "all") {
    const std::size_t n = trials_given ? trials : 1000;
    std::vector<SpectralGainReport> reports(n);
    parallel_for(n, [&](std::size_t t) {
      const std::size_t d = 2 + t % 7;
      const SpdPair p = sample_spd_commuting_pair(d, seed + 0x51ab5eedull * t, 0.05, 2.0);
      reports[t] = verify_spectral_gain(p);
    });
    auto f = rep.open_csv("verify_spectral.csv",
                          "trial,d,closed_a,closed_ab,power_a,power_ab,power_error,strict_gain");
    std::size_t pass = 0;
    double worst = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const auto& r = reports[t];
      f << t << ',' << 2 + t % 7 << ',' << fmt(r.closed_a) << ',' << fmt(r.closed_ab) << ','
        << fmt(r.power_a) << ',' << fmt(r.power_ab) << ',' << fmt(r.power_error) << ','
        << (r.strict_gain ? 1 : 0) << '\n';
      worst = std::max(worst, r.power_error);
      const bool ok = r.strict_gain && r.power_error <= 1e-8;
      if (ok) {
        ++pass;
      } else {
        invariant_failed = true;
        std::cout << "spectral violation at trial " << t << ": closed_a=" << fmt(r.closed_a)
                  << " closed_ab=" << fmt(r.closed_ab) << " power_error=" << fmt(r.power_error)
                  << '\n';
      }
    }
    std::cout << "spectral gain: " << pass << '/' << n << " pass, worst power error "
              << fmt(worst) << '\n';
  }

  if (kind == "jacobian" || kind == "all") {
    const std::size_t per = trials_given ? trials : 20;
    auto f = rep.open_csv("verify_jacobian.csv", "l,epsilon,dim,trials,max_error");
    double worst = 0.0;
    std::size_t combo = 0;
    for (int l : {8, 12, 16})
      for (int e = 1; e <= 5; ++e) {
        const std::size_t dim = 2 + combo % 7;
        const JacobianCheckReport r =
            verify_jacobian_recurrence(l, e, dim, per, seed + 7919 * combo);
        f << l << ',' << e << ',' << dim << ',' << per << ',' << fmt(r.max_error) << '\n';
        worst = std::max(worst, r.max_error);
        ++combo;
      }
    std::cout << "jacobian recurrence vs finite differences: worst error " << fmt(worst)
              << '\n';
    if (worst > 1e-6) {
      invariant_failed = true;
      std::cout << "jacobian violation: error above 1e-6\n";
    }
  }

  if (kind == "bounds" || kind == "all") {
    const std::size_t per = trials_given ? trials : 200;
    auto f = rep.open_csv("verify_bounds.csv",
                          "l,coeffs,eta,trials,inside,lower,upper,min_norm,max_norm");
    for (int l : {8, 12, 16}) {
      std::vector<std::vector<double>> coeff_sets = {{}, {1.0}};
      if (l >= 12) coeff_sets.push_back({1.0, 1.0});
      for (const auto& cs : coeff_sets)
        for (double eta : {0.01, 0.05, 0.2, 0.5}) {
          const JacobianBoundsReport r =
              verify_jacobian_bounds(l, cs, eta, per, seed + static_cast<std::uint64_t>(l));
          std::string ctag;
          for (std::size_t i = 0; i < cs.size(); ++i)
            ctag += (i ? ";" : "") + fmt(cs[i]);
          f << l << ',' << ctag << ',' << fmt(eta) << ',' << r.trials << ',' << r.inside << ','
            << fmt(r.lower) << ',' << fmt(r.upper) << ',' << fmt(r.min_norm) << ','
            << fmt(r.max_norm) << '\n';
          if (eta <= 0.05 && !r.all_inside)
            std::cout << "bounds: membership below 100% at eta=" << fmt(eta) << " l=" << l
                      << " (" << r.inside << '/' << r.trials << ")\n";
        }
    }
    std::cout << "jacobian interval sweep written (membership reported, not asserted)\n";
  }

  rep.write_manifest();
  return invariant_failed ? 2 : 0;
}

// ---- epsilon ----------------------------------------------------------------

int cmd_epsilon(const std::string& l_list, const std::string& eps_list, int epochs,
                double lr, std::size_t seed_count, std::uint64_t seed, double delta_safe,
                const std::string& out) {
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (lr < 0.0) throw std::invalid_argument("learning rate must be >= 0");
  if (seed_count < 1) throw std::invalid_argument("at least one seed required");
  const std::vector<int> ls = split_ints(l_list);
  if (ls.empty()) throw std::invalid_argument("empty l list");

  EpsilonRunConfig cfg;
  cfg.delta_safe = delta_safe;
  cfg.train.epochs = epochs;
  cfg.train.lr = lr;
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < seed_count; ++i) seeds.push_back(seed + i);

  Reporter rep(out, "epsilon");
  rep.set("l", l_list);
  rep.set("epsilon", eps_list.empty() ? "auto" : eps_list);
  rep.set("epochs", std::to_string(epochs));
  rep.set("lr", fmt(lr));
  rep.set("seeds", std::to_string(seed_count));
  rep.set("seed", std::to_string(seed));
  rep.set("delta_safe", fmt(delta_safe));

  std::vector<EpsilonExperimentOutcome> outcomes;
  if (eps_list.empty()) {
    // Default grid: for each l the bracket around the admissible budget,
    // epsilon in {l/4 - 1, l/4, l/4 + 1}.
    for (int l : ls) {
      std::vector<int> eps;
      for (int e : {l / 4 - 1, l / 4, l / 4 + 1})
        if (e >= 0) eps.push_back(e);
      auto part = run_epsilon_sweep({l}, eps, seeds, cfg);
      outcomes.insert(outcomes.end(), part.begin(), part.end());
    }
  } else {
    outcomes = run_epsilon_sweep(ls, split_ints(eps_list), seeds, cfg);
  }

  {
    auto f = rep.open_csv("summary.csv", "l,epsilon,admissible,min_l1,diverged,ordering,seed");
    for (const auto& o : outcomes)
      f << o.l << ',' << o.epsilon << ',' << (o.admissible ? 1 : 0) << ',' << fmt(o.min_l1)
        << ',' << (o.diverged ? 1 : 0) << ',' << ordering_name(o.ordering) << ',' << o.seed
        << '\n';
  }
  for (const auto& o : outcomes) {
    const std::string name = "heatmap_l" + std::to_string(o.l) + "_eps" +
                             std::to_string(o.epsilon) + "_seed" + std::to_string(o.seed) +
                             ".csv";
    auto f = rep.open_csv(name, "block,epoch,grad_norm");
    for (std::size_t ep = 0; ep < o.trace.rows.size(); ++ep)
      for (std::size_t b = 0; b < o.trace.rows[ep].size(); ++b)
        f << b + 1 << ',' << ep << ',' << fmt(o.trace.rows[ep][b]) << '\n';
  }
  std::cout << "epsilon sweep: " << outcomes.size() << " runs written\n";
  rep.write_manifest();
  return 0;
}

// ---- train / correlate -------------------------------------------------------

struct ToyRun {
  BlockKind kind;
  TrainResult result;
};

std::vector<ToyRun> run_toy_kinds(const std::vector<BlockKind>& kinds, int epochs, double lr,
                                  std::uint64_t seed, int l, int epsilon, double delta_safe) {
  const auto dataset = make_toy_dataset(12, 16, 2, seed);
  std::vector<ToyRun> runs(kinds.size());
  parallel_for(kinds.size(), [&](std::size_t i) {
    BlockConfig bc;
    bc.kind = kinds[i];
    bc.channels = 8;
    bc.delta_safe = delta_safe;
    if (kinds[i] == BlockKind::crb_star) {
      bc.l = l;
      bc.epsilon = epsilon;
    }
    CascadeModel model = make_cascade(bc, 5, seed);
    TrainConfig tc;
    tc.epochs = epochs;
    tc.lr = lr;
    tc.seed = seed;
    runs[i] = {kinds[i], train(model, dataset, tc)};
  });
  return runs;
}

void write_metrics_csv(Reporter& rep, const std::vector<ToyRun>& runs) {
  auto f = rep.open_csv("metrics.csv", "module,psnr,ssim,params,flops,cpu_ms,param_eff");
  for (const auto& r : runs) {
    const MetricRecord& m = r.result.metrics;
    f << m.module << ',' << fmt(m.psnr) << ',' << fmt(m.ssim) << ',' << m.params << ','
      << m.flops << ',' << fmt(m.cpu_ms) << ',' << fmt(m.param_eff) << '\n';
  }
}

int cmd_train(const std::string& blocks_list, int epochs, double lr, std::uint64_t seed, int l,
              int epsilon, double delta_safe, const std::string& out) {
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (lr < 0.0) throw std::invalid_argument("learning rate must be >= 0");
  std::vector<BlockKind> kinds;
  for (const auto& tok : split_list(blocks_list)) kinds.push_back(parse_kind(tok));
  if (kinds.empty()) throw std::invalid_argument("empty block list");

  Reporter rep(out, "train");
  rep.set("blocks", blocks_list);
  rep.set("epochs", std::to_string(epochs));
  rep.set("lr", fmt(lr));
  rep.set("seed", std::to_string(seed));
  rep.set("l", std::to_string(l));
  rep.set("epsilon", std::to_string(epsilon));
  rep.set("delta_safe", fmt(delta_safe));

  const auto runs = run_toy_kinds(kinds, epochs, lr, seed, l, epsilon, delta_safe);
  for (const auto& r : runs) {
    auto f = rep.open_csv("loss_" + kind_file_tag(r.kind) + ".csv", "epoch,mean_l1");
    for (std::size_t e = 0; e < r.result.epoch_loss.size(); ++e)
      f << e << ',' << fmt(r.result.epoch_loss[e]) << '\n';
    if (r.result.diverged)
      f << "# diverged_at_epoch=" << r.result.diverged_epoch << '\n';
  }
  write_metrics_csv(rep, runs);
  std::cout << "trained " << runs.size() << " cascade(s), " << epochs << " epochs each\n";
  rep.write_manifest();
  return 0;
}

int cmd_correlate(const std::string& blocks_list, const std::string& forms_list, int epochs,
                  std::uint64_t seed, const std::string& corpus, const std::string& out) {
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  std::vector<BlockKind> kinds;
  for (const auto& tok : split_list(blocks_list)) kinds.push_back(parse_kind(tok));
  if (kinds.empty()) throw std::invalid_argument("empty block list");
  for (BlockKind k : kinds)
    if (k == BlockKind::crb_star)
      throw std::invalid_argument("correlate uses corpus-backed kinds only (RB, CRB, DCRB)");
  const auto forms = select_forms(forms_list);
  const auto descs = load_corpus(corpus);
  auto descriptor_of = [&](BlockKind k) -> const ModuleDescriptor& {
    const std::string name = block_kind_name(k);
    for (const auto& d : descs)
      if (d.name == name) return d;
    throw std::invalid_argument("corpus has no descriptor named " + name);
  };

  Reporter rep(out, "correlate");
  rep.set("blocks", blocks_list);
  rep.set("forms", forms_list);
  rep.set("epochs", std::to_string(epochs));
  rep.set("seed", std::to_string(seed));
  rep.set("corpus", corpus);

  const auto runs = run_toy_kinds(kinds, epochs, 1e-3, seed, 0, -1, 0.0);
  std::vector<MetricRecord> records;
  for (const auto& r : runs) records.push_back(r.result.metrics);

  std::vector<std::pair<std::string, std::vector<double>>> scores;
  for (const auto& form : forms) {
    std::vector<double> full, a_only, b_only, t_only;
    for (BlockKind k : kinds) {
      const ModuleDescriptor& d = descriptor_of(k);
      full.push_back(evaluate_uae(form, d));
      a_only.push_back(ablate(form, d, {true, false, false}));
      b_only.push_back(ablate(form, d, {false, true, false}));
      t_only.push_back(ablate(form, d, {false, false, true}));
    }
    scores.emplace_back(form.name, std::move(full));
    scores.emplace_back(form.name + "_l_only", std::move(a_only));
    scores.emplace_back(form.name + "_k_only", std::move(b_only));
    scores.emplace_back(form.name + "_n_only", std::move(t_only));
  }

  const auto entries = correlate_metrics(records, scores);
  write_metrics_csv(rep, runs);
  {
    auto f = rep.open_csv("correlation.csv", "variant,metric,rho,defined,low_power");
    for (const auto& e : entries)
      f << e.variant << ',' << e.metric << ',' << fmt(e.rho) << ',' << (e.defined ? 1 : 0)
        << ',' << (e.low_power ? 1 : 0) << '\n';
  }
  std::cout << "correlation matrix over " << records.size() << " records written\n";
  rep.write_manifest();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"module universality laboratory"};
  app.require_subcommand(1);

  std::string corpus = std::string(UAELAB_CORPUS_DIR) + "/golden.txt";
  std::string forms = "phi1,phi2,phi3,phi4,phi5,phi6";
  std::string out = "out";
  std::uint64_t seed = 42;
  double tie_tol = kDefaultTieTolerance;

  auto* uae_cmd = app.add_subcommand("uae", "evaluate universality scores over a corpus");
  uae_cmd->add_option("--corpus", corpus);
  uae_cmd->add_option("--forms", forms);
  uae_cmd->add_option("--out", out);
  uae_cmd->add_option("--seed", seed);
  uae_cmd->add_option("--tie-tol", tie_tol);

  std::string ablate_forms = "phi3", only;
  auto* ablate_cmd = app.add_subcommand("ablate", "factor-subset ablation grid");
  ablate_cmd->add_option("--corpus", corpus);
  ablate_cmd->add_option("--forms", ablate_forms);
  ablate_cmd->add_option("--only", only);
  ablate_cmd->add_option("--out", out);
  ablate_cmd->add_option("--seed", seed);

  std::string sens_forms = "phi3";
  auto* sens_cmd = app.add_subcommand("sensitivity", "elasticities and Shapley attribution");
  sens_cmd->add_option("--corpus", corpus);
  sens_cmd->add_option("--forms", sens_forms);
  sens_cmd->add_option("--out", out);
  sens_cmd->add_option("--seed", seed);

  std::string kind = "all";
  std::size_t trials = 0;
  auto* verify_cmd = app.add_subcommand("verify", "numeric verification of gradient theory");
  verify_cmd->add_option("--kind", kind);
  auto* trials_opt = verify_cmd->add_option("--trials", trials);
  verify_cmd->add_option("--seed", seed);
  verify_cmd->add_option("--out", out);

  std::string l_list = "8,12,16", eps_list;
  int epochs = 40;
  double lr = 1e-3;
  std::size_t seed_count = 3;
  double delta_safe = 0.0;
  auto* eps_cmd = app.add_subcommand("epsilon", "residual-budget phase experiment");
  eps_cmd->add_option("--l", l_list);
  eps_cmd->add_option("--epsilon", eps_list);
  eps_cmd->add_option("--epochs", epochs);
  eps_cmd->add_option("--lr", lr);
  eps_cmd->add_option("--trials", seed_count);
  eps_cmd->add_option("--seed", seed);
  eps_cmd->add_option("--delta-safe", delta_safe);
  eps_cmd->add_option("--out", out);

  std::string blocks_list = "RB,CRB,DCRB";
  int star_l = 8, star_eps = -1;
  auto* train_cmd = app.add_subcommand("train", "toy restoration training runs");
  train_cmd->add_option("--blocks", blocks_list);
  train_cmd->add_option("--epochs", epochs);
  train_cmd->add_option("--lr", lr);
  train_cmd->add_option("--seed", seed);
  train_cmd->add_option("--l", star_l);
  train_cmd->add_option("--epsilon", star_eps);
  train_cmd->add_option("--delta-safe", delta_safe);
  train_cmd->add_option("--out", out);

  std::string corr_forms = "phi3";
  auto* corr_cmd = app.add_subcommand("correlate", "rank correlation of scores vs metrics");
  corr_cmd->add_option("--blocks", blocks_list);
  corr_cmd->add_option("--forms", corr_forms);
  corr_cmd->add_option("--epochs", epochs);
  corr_cmd->add_option("--seed", seed);
  corr_cmd->add_option("--corpus", corpus);
  corr_cmd->add_option("--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (app.got_subcommand(uae_cmd)) return cmd_uae(corpus, forms, out, seed, tie_tol);
    if (app.got_subcommand(ablate_cmd)) return cmd_ablate(corpus, ablate_forms, only, out, seed);
    if (app.got_subcommand(sens_cmd)) return cmd_sensitivity(corpus, sens_forms, out, seed);
    if (app.got_subcommand(verify_cmd))
      return cmd_verify(kind, trials, trials_opt->count() > 0, seed, out);
    if (app.got_subcommand(eps_cmd))
      return cmd_epsilon(l_list, eps_list, epochs, lr, seed_count, seed, delta_safe, out);
    if (app.got_subcommand(train_cmd))
      return cmd_train(blocks_list, epochs, lr, seed, star_l, star_eps, delta_safe, out);
    if (app.got_subcommand(corr_cmd))
      return cmd_correlate(blocks_list, corr_forms, epochs, seed, corpus, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::cerr << "error: no subcommand selected\n";
  return 1;
}
