#include "areal/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "areal/diagnostics.hpp"
#include "areal/io.hpp"
#include "areal/mcmc.hpp"
#include "areal/simulate.hpp"

namespace areal {

namespace {

namespace fs = std::filesystem;

void ensure_output_dir(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.paths.output_dir, ec);
  if (ec)
    throw data_error("cannot create output directory '" +
                     cfg.paths.output_dir + "': " + ec.message());
}

AdjacencyGraph load_graph(const RunConfig& cfg, std::ostream& out) {
  if (cfg.paths.adjacency.empty())
    throw config_error("paths.adjacency is required for this command");
  const EdgeListLoad load = load_adjacency(cfg.paths.adjacency);
  if (load.duplicate_rows > 0)
    out << "warning: ignored " << load.duplicate_rows
        << " duplicate adjacency rows\n";
  return load.graph;
}

double resolve_scaling(const RunConfig& cfg, const AdjacencyGraph& g,
                       std::ostream& out) {
  if (cfg.model.c) return *cfg.model.c;
  const double c = compute_scaling_factor(g, cfg.model.alpha);
  out << "scaling factor c = " << format_number(c) << " (auto)\n";
  return c;
}

PriorSpec make_prior(const RunConfig& cfg, Index p) {
  if (cfg.prior.ridge)
    return PriorSpec::ridge(p, *cfg.prior.ridge, cfg.prior.a_sigma,
                            cfg.prior.b_sigma);
  return PriorSpec::flat_beta(p, cfg.prior.a_sigma, cfg.prior.b_sigma);
}

struct LoadedProblem {
  AdjacencyGraph graph;
  CarStructure car;
  Matrix x;
  Vector y;
};

LoadedProblem load_problem(const RunConfig& cfg, std::ostream& out) {
  LoadedProblem lp;
  lp.graph = load_graph(cfg, out);
  if (cfg.paths.data.empty())
    throw config_error("paths.data is required for this command");
  const Dataset data = read_data_csv(cfg.paths.data);
  const AlignedData aligned = align_to_graph(data, lp.graph);
  lp.car = build_car_precision(lp.graph, cfg.model.alpha,
                               resolve_scaling(cfg, lp.graph, out));
  lp.x = aligned.x;
  lp.y = aligned.y;
  return lp;
}

Vector column_quantiles(Vector sorted, double lo_q, double hi_q, double* mean) {
  std::sort(sorted.data(), sorted.data() + sorted.size());
  const auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const Index i = static_cast<Index>(pos);
    const double frac = pos - static_cast<double>(i);
    if (i + 1 >= sorted.size()) return sorted[sorted.size() - 1];
    return sorted[i] * (1.0 - frac) + sorted[i + 1] * frac;
  };
  if (mean != nullptr) *mean = sorted.mean();
  Vector out(2);
  out[0] = quantile(lo_q);
  out[1] = quantile(hi_q);
  return out;
}

void write_summary(const std::string& path, const PosteriorDraws& draws,
                   bool mcmc, std::ostream& out) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw data_error("cannot open '" + path + "' for writing");
  f << "parameter,mean,ci_lower,ci_upper\n";
  out << "posterior summary (mean, 95% credible interval):\n";
  const auto emit = [&](const std::string& name, Vector column) {
    double mean = 0.0;
    const Vector ci = column_quantiles(std::move(column), 0.025, 0.975, &mean);
    f << name << ',' << format_number(mean) << ',' << format_number(ci[0])
      << ',' << format_number(ci[1]) << '\n';
    out << "  " << name << ": " << format_number(mean) << " ("
        << format_number(ci[0]) << ", " << format_number(ci[1]) << ")\n";
  };
  for (Index j = 0; j < draws.beta.cols(); ++j)
    emit("beta_" + std::to_string(j), draws.beta.col(j));
  emit("sigma2", draws.sigma2);
  emit("rho", draws.rho);
  if (mcmc)
    out << "  MH acceptance rate: " << format_number(draws.meta.accept_rate)
        << '\n';
}

PosteriorDraws concatenate(const std::vector<PosteriorDraws>& chains) {
  if (chains.size() == 1) return chains[0];
  Index total = 0;
  for (const auto& c : chains) total += c.size();
  PosteriorDraws all;
  const Index p = chains[0].beta.cols();
  const Index n = chains[0].gamma.cols();
  all.beta.resize(total, p);
  all.gamma.resize(total, n);
  all.phi.resize(total, n);
  all.sigma2.resize(total);
  all.rho.resize(total);
  all.meta = chains[0].meta;
  Index row = 0;
  for (const auto& c : chains) {
    all.beta.middleRows(row, c.size()) = c.beta;
    all.gamma.middleRows(row, c.size()) = c.gamma;
    all.phi.middleRows(row, c.size()) = c.phi;
    all.sigma2.segment(row, c.size()) = c.sigma2;
    all.rho.segment(row, c.size()) = c.rho;
    row += c.size();
  }
  double acc = 0.0;
  for (const auto& c : chains) acc += c.meta.accept_rate;
  all.meta.accept_rate = acc / static_cast<double>(chains.size());
  return all;
}

PosteriorDraws load_draws(const RunConfig& cfg, Index p) {
  const std::string path = cfg.draws_path();
  if (path.size() > 4 && path.substr(path.size() - 4) == ".bin")
    return read_draws_binary(path, p);
  return read_draws_csv(path);
}

}  // namespace

void cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  ensure_output_dir(cfg);
  AdjacencyGraph g;
  if (cfg.paths.adjacency.empty()) {
    g = lattice_graph(cfg.simulate.rows, cfg.simulate.cols);
    out << "lattice graph " << cfg.simulate.rows << "x" << cfg.simulate.cols
        << ": n = " << g.n << ", pairs = " << g.edges.size() << '\n';
  } else {
    g = load_graph(cfg, out);
  }
  const double c = resolve_scaling(cfg, g, out);
  const CarStructure car = build_car_precision(g, cfg.model.alpha, c);

  Vector beta(2);
  beta << cfg.simulate.beta[0], cfg.simulate.beta[1];
  const SimulatedDataset sim =
      generate_dataset(g, cfg.model.alpha, c, beta, cfg.simulate.sigma2,
                       cfg.simulate.rho, cfg.simulate.seed);

  Dataset data;
  data.regions = g.labels;
  data.y = sim.y;
  data.covariates = sim.x.col(1);
  data.covariate_names = {"x1"};
  const std::string data_path = cfg.paths.output_dir + "/data.csv";
  write_data_csv(data_path, data);

  const auto pairs = neighbor_pairs(g);
  const Vector diffs = true_standardized_diffs(sim, car, pairs);
  const std::string truth_path = cfg.paths.output_dir + "/truth.csv";
  write_truth_csv(truth_path, g, pairs, diffs);

  out << "simulated " << g.n << " regions (seed " << cfg.simulate.seed
      << "): beta = (" << format_number(beta[0]) << ", "
      << format_number(beta[1]) << "), sigma2 = "
      << format_number(cfg.simulate.sigma2)
      << ", rho = " << format_number(cfg.simulate.rho) << ", alpha = "
      << format_number(cfg.model.alpha) << ", c = " << format_number(c)
      << '\n';
  out << "wrote " << data_path << " and " << truth_path << '\n';
}

void cmd_fit(const RunConfig& cfg, std::ostream& out) {
  ensure_output_dir(cfg);
  const LoadedProblem lp = load_problem(cfg, out);
  const PriorSpec prior = make_prior(cfg, lp.x.cols());

  std::vector<PosteriorDraws> chains;
  bool mcmc = !cfg.model.rho.has_value();
  if (!mcmc) {
    const AugmentedPosterior ap(lp.x, lp.y, lp.car, *cfg.model.rho, prior);
    for (Index c = 0; c < cfg.sampler.chains; ++c) {
      PosteriorDraws d = exact_sample(
          ap, cfg.sampler.draws,
          cfg.sampler.seed + static_cast<std::uint64_t>(c));
      d.meta.chain_id = c;
      chains.push_back(std::move(d));
    }
    out << "exact sampler at rho = " << format_number(*cfg.model.rho) << ", "
        << cfg.sampler.draws << " draws per chain, " << cfg.sampler.chains
        << " chain(s)\n";
  } else {
    if (!prior.flat())
      throw config_error(
          "fit: the pc-prior sampler requires the flat beta prior");
    const GibbsWorkspace ws(lp.x, lp.y, lp.car);
    const PcPrior pc = pc_prior_calibrate(ws.basis().lambda,
                                          cfg.model.pc_bound,
                                          cfg.model.pc_mass);
    out << "pc prior: lambda_rho = " << format_number(pc.lambda_rho)
        << " for P(rho <= " << format_number(pc.calibration_bound)
        << ") = " << format_number(pc.calibration_mass)
        << (pc.degenerate ? " (degenerate)" : "") << '\n';
    McmcConfig mc;
    mc.iterations = cfg.sampler.iterations;
    mc.burn_in = cfg.sampler.burn_in;
    mc.thin = cfg.sampler.thin;
    mc.seed = cfg.sampler.seed;
    mc.pc = pc;
    mc.a_sigma = cfg.prior.a_sigma;
    mc.b_sigma = cfg.prior.b_sigma;

    chains.resize(cfg.sampler.chains);
    std::vector<std::thread> workers;
    for (Index c = 0; c < cfg.sampler.chains; ++c) {
      workers.emplace_back([&, c] {
        McmcConfig local = mc;
        local.chain_id = c;
        chains[c] = run_chain(lp.x, lp.y, lp.car, local);
      });
    }
    for (auto& w : workers) w.join();
    out << "metropolis-within-gibbs: " << cfg.sampler.iterations
        << " sweeps (" << cfg.sampler.burn_in << " burn-in), thin "
        << cfg.sampler.thin << ", " << cfg.sampler.chains << " chain(s)\n";
  }

  const std::string draws_path = cfg.draws_path();
  if (cfg.sampler.format == "binary")
    write_draws_binary(draws_path, chains);
  else
    write_draws_csv(draws_path, chains);

  const PosteriorDraws all = concatenate(chains);
  write_summary(cfg.paths.output_dir + "/summary.csv", all, mcmc, out);
  out << "wrote " << draws_path << " and " << cfg.paths.output_dir
      << "/summary.csv\n";
}

void cmd_detect(const RunConfig& cfg, std::ostream& out) {
  ensure_output_dir(cfg);
  const LoadedProblem lp = load_problem(cfg, out);
  const auto pairs = neighbor_pairs(lp.graph);
  const PosteriorDraws draws = load_draws(cfg, lp.x.cols());
  if (draws.gamma.cols() != lp.graph.n)
    throw data_error("detect: draws and graph dimensions disagree");

  const Matrix xtx_inv = spd_inverse(lp.x.transpose() * lp.x);
  Matrix second = Matrix::Identity(lp.graph.n, lp.graph.n) -
                  lp.x * xtx_inv * lp.x.transpose();
  second = 0.5 * (second + second.transpose()).eval();
  const SpectralBasis basis = simul_reduce(lp.car.precision, second);
  const DiffProbTable table = build_diff_prob_table(draws, pairs, basis);

  const EpsilonGrid grid{cfg.decision.grid_min, cfg.decision.grid_max,
                         cfg.decision.grid_points, true};
  const auto prob_fn = [&](double eps) { return table.probabilities(eps); };
  const EntropyScan scan = select_epsilon_ce(prob_fn, grid);

  double epsilon;
  if (cfg.decision.epsilon) {
    epsilon = *cfg.decision.epsilon;
    out << "difference threshold epsilon = " << format_number(epsilon)
        << " (fixed)\n";
  } else {
    epsilon = scan.epsilon_ce;
    out << "difference threshold epsilon = " << format_number(epsilon)
        << " (entropy" << (scan.flat ? ", flat objective" : "") << ")\n";
  }

  const Vector v = table.probabilities(epsilon);
  const DecisionSet decisions = select_threshold(v, cfg.decision.delta,
                                                 epsilon);

  write_disparities_csv(cfg.paths.output_dir + "/disparities.csv", lp.graph,
                        pairs, v, decisions.decisions);
  write_scan_csv(cfg.paths.output_dir + "/entropy_scan.csv", scan);

  // FDR/FNR curve over the candidate cutoffs plus the endpoints.
  std::vector<double> cutoffs(v.data(), v.data() + v.size());
  cutoffs.push_back(0.0);
  cutoffs.push_back(1.0);
  std::sort(cutoffs.begin(), cutoffs.end());
  cutoffs.erase(std::unique(cutoffs.begin(), cutoffs.end()), cutoffs.end());
  Vector ts(static_cast<Index>(cutoffs.size()));
  Vector fdr(ts.size()), fnr(ts.size());
  for (Index i = 0; i < ts.size(); ++i) {
    ts[i] = cutoffs[i];
    fdr[i] = bayes_fdr(v, ts[i]);
    fnr[i] = bayes_fnr(v, ts[i]);
  }
  write_curve_csv(cfg.paths.output_dir + "/fdr_fnr_curve.csv", ts, fdr, fnr);

  // Epsilon / delta / declared-count trade-off table over the scan grid.
  {
    std::ofstream f(cfg.paths.output_dir + "/tradeoff.csv", std::ios::binary);
    if (!f) throw data_error("cannot write tradeoff.csv");
    f << "epsilon,t_star,declared,fdr,fnr\n";
    for (Index i = 0; i < scan.epsilon_grid.size(); ++i) {
      const Vector vg = table.probabilities(scan.epsilon_grid[i]);
      const DecisionSet dg =
          select_threshold(vg, cfg.decision.delta, scan.epsilon_grid[i]);
      f << format_number(scan.epsilon_grid[i]) << ','
        << (dg.no_threshold ? std::string("none") : format_number(dg.t_star))
        << ',' << dg.declared_count << ',' << format_number(dg.fdr_at_cutoff)
        << ',' << format_number(dg.fnr_at_cutoff) << '\n';
    }
  }

  // Machine-readable decision record for downstream classification.
  {
    nlohmann::json j;
    j["epsilon"] = epsilon;
    j["delta"] = decisions.delta;
    j["t_star"] = decisions.t_star;
    j["declared"] = decisions.declared_count;
    j["fdr_at_cutoff"] = decisions.fdr_at_cutoff;
    j["fnr_at_cutoff"] = decisions.fnr_at_cutoff;
    j["no_threshold"] = decisions.no_threshold;
    j["entropy_selected"] = !cfg.decision.epsilon.has_value();
    j["scan_flat"] = scan.flat;
    std::ofstream f(cfg.paths.output_dir + "/decision.json",
                    std::ios::binary);
    if (!f) throw data_error("cannot write decision.json");
    f << j.dump(2) << '\n';
  }

  out << "declared " << decisions.declared_count << " of " << pairs.size()
      << " boundaries at t* = "
      << (decisions.no_threshold ? std::string("none")
                                 : format_number(decisions.t_star))
      << " (delta = " << format_number(cfg.decision.delta)
      << ", FDR = " << format_number(decisions.fdr_at_cutoff)
      << ", FNR = " << format_number(decisions.fnr_at_cutoff) << ")\n";
  out << "wrote disparities.csv, fdr_fnr_curve.csv, entropy_scan.csv, "
         "tradeoff.csv, decision.json in "
      << cfg.paths.output_dir << '\n';
}

void cmd_diagnose(const RunConfig& cfg, std::ostream& out) {
  ensure_output_dir(cfg);
  const LoadedProblem lp = load_problem(cfg, out);
  const PriorSpec prior = make_prior(cfg, lp.x.cols());
  nlohmann::json report;
  report["schema_version"] = 1;
  report["seed"] = cfg.sampler.seed;

  nlohmann::json dic_grid = nlohmann::json::array();
  nlohmann::json lppd_grid = nlohmann::json::array();
  const PriorSpec flat =
      PriorSpec::flat_beta(lp.x.cols(), cfg.prior.a_sigma, cfg.prior.b_sigma);
  for (double rho : cfg.diagnose.rho_grid) {
    const DicResult dic = dic_exact(lp.x, lp.y, lp.car, flat, rho);
    dic_grid.push_back({{"rho", rho},
                        {"log_lik_at_mean", dic.log_lik_at_mean},
                        {"p_dic", dic.p_dic},
                        {"dic", dic.dic},
                        {"p_dic_limit", dic.p_dic_limit}});
    const LppdResult lppd =
        waic_lppd_mc(lp.x, lp.y, lp.car, flat, rho, cfg.diagnose.lppd_draws,
                     cfg.sampler.seed);
    lppd_grid.push_back({{"rho", rho},
                         {"lppd", lppd.lppd},
                         {"mc_draws", lppd.mc_draws}});
  }
  report["dic_grid"] = dic_grid;
  report["lppd_grid"] = lppd_grid;

  if (cfg.diagnose.permutations > 0) {
    // OLS residuals, as in the exploratory autocorrelation screen.
    const Matrix xtx_chol = cholesky_spd(lp.x.transpose() * lp.x);
    const Vector beta_hat =
        spd_solve(xtx_chol, lp.x.transpose() * lp.y);
    const Vector resid = lp.y - lp.x * beta_hat;
    const MoranGeary mg = moran_geary(resid, lp.graph,
                                      cfg.diagnose.permutations,
                                      cfg.sampler.seed);
    report["moran_geary"] = {{"moran_i", mg.moran_i},
                             {"geary_c", mg.geary_c},
                             {"p_moran", mg.p_moran},
                             {"p_geary", mg.p_geary},
                             {"permutations", mg.permutations}};
    out << "Moran's I = " << format_number(mg.moran_i)
        << " (p = " << format_number(mg.p_moran) << "), Geary's C = "
        << format_number(mg.geary_c) << " (p = " << format_number(mg.p_geary)
        << ")\n";
  } else {
    report["moran_geary"] = nullptr;
  }

  if (cfg.diagnose.classification) {
    if (cfg.paths.truth.empty())
      throw config_error(
          "diagnose: classification requires paths.truth");
    const TruthFile truth = read_truth_csv(cfg.paths.truth);
    const DisparityFile disp =
        read_disparities_csv(cfg.paths.output_dir + "/disparities.csv");
    std::ifstream dj(cfg.paths.output_dir + "/decision.json");
    if (!dj)
      throw data_error("diagnose: missing decision.json (run detect first)");
    nlohmann::json decision_json = nlohmann::json::parse(dj);
    const double epsilon = decision_json.at("epsilon").get<double>();

    // Key by the label pair to align the two files.
    std::map<std::pair<std::string, std::string>, Index> pos;
    for (std::size_t k = 0; k < truth.pairs.size(); ++k)
      pos[truth.pairs[k]] = static_cast<Index>(k);
    std::vector<std::uint8_t> truth_flags(disp.pairs.size());
    for (std::size_t k = 0; k < disp.pairs.size(); ++k) {
      const auto it = pos.find(disp.pairs[k]);
      if (it == pos.end())
        throw data_error("diagnose: truth file is missing pair " +
                         disp.pairs[k].first + "," + disp.pairs[k].second);
      truth_flags[k] = truth.std_diffs[it->second] > epsilon ? 1 : 0;
    }
    const ClassificationReport cr =
        classification_metrics(disp.decisions, truth_flags, disp.v);
    report["classification"] = {
        {"epsilon", epsilon},
        {"sensitivity", cr.sensitivity},
        {"specificity", cr.specificity},
        {"accuracy", cr.accuracy},
        {"true_fdr", cr.true_fdr},
        {"true_fnr", cr.true_fnr},
        {"auc", cr.auc},
        {"roc_undefined", cr.roc_undefined}};
    out << "classification vs truth at epsilon = " << format_number(epsilon)
        << ": sensitivity " << format_number(cr.sensitivity)
        << ", specificity " << format_number(cr.specificity) << ", accuracy "
        << format_number(cr.accuracy) << ", true FDR "
        << format_number(cr.true_fdr) << ", AUC " << format_number(cr.auc)
        << '\n';
  } else {
    report["classification"] = nullptr;
  }

  const std::string path = cfg.paths.output_dir + "/diagnostics.json";
  std::ofstream f(path, std::ios::binary);
  if (!f) throw data_error("cannot write '" + path + "'");
  f << report.dump(2) << '\n';
  out << "wrote " << path << '\n';
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Difference-boundary detection on areal maps"};
  app.require_subcommand(1);
  std::string config_path;

  const auto add = [&](const char* name, const char* desc) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("-c,--config", config_path, "JSON configuration file")
        ->required();
    return sub;
  };
  CLI::App* sim = add("simulate", "Generate a synthetic dataset with truth");
  CLI::App* fit = add("fit", "Draw from the posterior (exact or MCMC)");
  CLI::App* det = add("detect", "Classify difference boundaries");
  CLI::App* dia = add("diagnose", "Information criteria and diagnostics");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    const RunConfig cfg = load_config(config_path);
    if (sim->parsed()) cmd_simulate(cfg, std::cout);
    if (fit->parsed()) cmd_fit(cfg, std::cout);
    if (det->parsed()) cmd_detect(cfg, std::cout);
    if (dia->parsed()) cmd_diagnose(cfg, std::cout);
    return 0;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const data_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace areal
