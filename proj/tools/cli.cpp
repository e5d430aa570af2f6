#include "cli.hpp"

#include <cmath>
#include <filesystem>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "mfbm/changepoint.hpp"
#include "mfbm/error.hpp"
#include "mfbm/inference.hpp"
#include "mfbm/io.hpp"
#include "mfbm/kernels.hpp"
#include "mfbm/montecarlo.hpp"
#include "mfbm/simulate.hpp"
#include "mfbm/stats.hpp"
#include "mfbm/wavelet.hpp"

namespace mfbm::cli {

namespace {

// Error raised by a named pipeline stage; keeps the library error category.
template <class E>
[[noreturn]] void rethrow_staged(const std::string& stage, const E& e) {
  throw E(stage + ": " + e.what());
}

template <class F>
auto staged(const std::string& stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const SimulationError& e) {
    throw SimulationError(stage + ": " + e.what(), e.achieved());
  } catch (const NumericError& e) {
    throw NumericError(stage + ": " + e.what(), e.achieved());
  } catch (const DegeneratePathError& e) {
    throw DegeneratePathError(stage + ": " + e.what(), e.frequency());
  } catch (const AnalysisError& e) {
    throw AnalysisError(stage + ": " + e.what(), e.frequency());
  } catch (const ArgumentError& e) {
    rethrow_staged(stage, e);
  } catch (const DomainError& e) {
    rethrow_staged(stage, e);
  } catch (const InfeasibleError& e) {
    rethrow_staged(stage, e);
  } catch (const ResourceError& e) {
    rethrow_staged(stage, e);
  }
}

using Entries = std::vector<std::pair<std::string, Json>>;

// One entry per flag, in flag order; drives both the JSON echo and the
// re-runnable config file.
Entries config_entries(const RunConfig& c) {
  return {{"H", c.H},
          {"sigma", c.sigma},
          {"sigma2", c.sigma2},
          {"omega", c.omega},
          {"H-grid", c.H_grid},
          {"wavelet", c.wavelet},
          {"alpha", c.alpha},
          {"beta", c.beta},
          {"wavelet-table", c.wavelet_table},
          {"f-min", c.f_min},
          {"f-max", c.f_max},
          {"r", c.r},
          {"m", c.m},
          {"level", c.level},
          {"k-max", c.K_max},
          {"sigma-convention", c.sigma_convention},
          {"N", c.N},
          {"delta", c.delta},
          {"seed", c.seed},
          {"stream", c.stream},
          {"replications", c.replications},
          {"max-n", c.max_n},
          {"out", c.out},
          {"workers", c.workers},
          {"threads", c.threads},
          {"simd", c.simd}};
}

Json config_json(const RunConfig& c) {
  Json j = Json::object();
  for (auto& [k, v] : config_entries(c)) j[k] = v;
  return j;
}

std::string config_text(const RunConfig& c) {
  auto scalar = [](const Json& v) -> std::string {
    if (v.is_number_float()) return format_number(v.get<double>());
    return v.dump();
  };
  std::ostringstream os;
  for (auto& [k, v] : config_entries(c)) {
    if (v.is_array()) {
      if (v.empty()) continue;
      os << k << "=[";
      for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << scalar(v[i]);
      os << "]\n";
    } else {
      os << k << '=' << scalar(v) << '\n';
    }
  }
  return os.str();
}

ModelSpec model_of(const RunConfig& c) {
  ModelSpec m;
  m.H = c.H;
  m.omega = c.omega;
  if (!c.sigma2.empty()) {
    m.sigma.clear();
    for (double s2 : c.sigma2) {
      if (!(s2 > 0.0)) throw ArgumentError("sigma2 values must be positive");
      m.sigma.push_back(std::sqrt(s2));
    }
  } else {
    m.sigma = c.sigma;
  }
  m.validate();
  return m;
}

BandWavelet wavelet_of(const RunConfig& c) {
  switch (parse_wavelet_kind(c.wavelet)) {
    case WaveletKind::bump:
      return BandWavelet::bump(c.alpha, c.beta);
    case WaveletKind::meyer_shifted:
      return BandWavelet::meyer_shifted();
    case WaveletKind::custom_table:
      if (c.wavelet_table.empty()) throw ArgumentError("custom-table wavelet needs --wavelet-table");
      return BandWavelet::load_custom(c.wavelet_table, c.alpha, c.beta);
  }
  throw ArgumentError("unknown wavelet");
}

FitConfig fit_config_of(const RunConfig& c) {
  FitConfig f;
  f.m = c.m;
  f.level = c.level;
  f.K_max = c.K_max;
  f.convention = parse_sigma_convention(c.sigma_convention);
  if (f.m < 3) throw ArgumentError("m must be at least 3");
  if (!(c.level > 0.0 && c.level < 1.0)) throw ArgumentError("level must lie in (0, 1)");
  return f;
}

void apply_simd(const RunConfig& c) {
  if (c.simd == "auto") return;
  kernels::set_active_isa(kernels::parse_isa(c.simd));
}

Json wavelet_json(const BandWavelet& w, const RunConfig& c) {
  Json j{{"kind", std::string(wavelet_kind_name(w.kind()))},
         {"alpha", w.alpha()},
         {"beta", w.beta()}};
  if (w.kind() == WaveletKind::custom_table) j["table"] = c.wavelet_table;
  return j;
}

Json report_head(const std::string& command, const RunConfig& c) {
  return Json{{"command", command},
              {"config", config_json(c)},
              {"isa", std::string(kernels::isa_name(kernels::active_isa()))}};
}

std::string out_file(const RunConfig& c, const std::string& name) {
  std::filesystem::create_directories(c.out);
  return (std::filesystem::path(c.out) / name).string();
}

void write_json(const std::string& file, const Json& j) { write_text(file, j.dump(2) + "\n"); }

int cmd_simulate(const RunConfig& c, std::ostream& out) {
  const ModelSpec model = staged("config", [&] { return model_of(c); });
  SimConfig sim{model, c.N, c.delta, c.seed, c.stream, c.max_n};
  staged("config", [&] { sim.validate(); });
  const SampledPath path = staged("simulate", [&] { return simulate_path(sim); });

  const std::string csv = out_file(c, "path.csv");
  write_path_csv(csv, path);
  Json meta = report_head("simulate", c);
  meta["model"] = to_json(model);
  meta["N"] = path.size();
  meta["delta"] = path.delta;
  meta["seed"] = c.seed;
  meta["stream"] = c.stream;
  meta["path"] = "path.csv";
  write_json(out_file(c, "path.json"), meta);
  write_text(out_file(c, "simulate.cfg"), config_text(c));
  out << "wrote " << csv << " (" << path.size() << " samples, delta " << format_number(path.delta)
      << ")\n";
  return kOk;
}

struct Analysis {
  SampledPath path;
  BandWavelet wavelet;
  WaveletSpectrum spectrum;
};

Analysis analyze_input(const RunConfig& c, const std::string& input) {
  BandWavelet w = staged("config", [&] { return wavelet_of(c); });
  SampledPath path = staged("read", [&] { return read_path_csv(input, c.delta); });
  const FrequencyGrid grid = staged("grid", [&] {
    return build_grid(path.size(), path.delta, c.f_min, c.f_max, w);
  });
  WaveletSpectrum spec = staged("spectrum", [&] { return spectrum(path, w, grid, c.r, c.threads); });
  return {std::move(path), std::move(w), std::move(spec)};
}

Json input_json(const std::string& input, const SampledPath& path) {
  return Json{{"file", input}, {"N", path.size()}, {"delta", path.delta}};
}

int cmd_analyze(const RunConfig& c, const std::string& input, std::ostream& out) {
  const Analysis a = analyze_input(c, input);
  const auto& spec = a.spectrum;
  const Line line = ols_line(spec.Y, spec.grid, 0, spec.Y.size() - 1);

  write_spectrum_csv(out_file(c, "spectrum.csv"), spec);
  Json rep = report_head("analyze", c);
  rep["input"] = input_json(input, a.path);
  rep["wavelet"] = wavelet_json(a.wavelet, c);
  rep["grid"] = to_json(spec.grid);
  rep["r"] = spec.r;
  rep["points"] = spec.Y.size();
  rep["ols_all"] = Json{{"slope", line.slope}, {"intercept", line.intercept}};
  rep["spectrum"] = "spectrum.csv";
  write_json(out_file(c, "analyze.json"), rep);
  write_text(out_file(c, "analyze.cfg"), config_text(c));
  out << "spectrum: " << spec.Y.size() << " frequencies, overall slope "
      << format_number(line.slope) << '\n';
  for (const auto& warn : spec.grid.warnings) out << "warning: " << warn << '\n';
  return kOk;
}

int cmd_fit(const RunConfig& c, const std::string& input, std::ostream& out) {
  const FitConfig fc = staged("config", [&] { return fit_config_of(c); });
  const Analysis a = analyze_input(c, input);
  const Selection sel = staged("fit", [&] { return select_K(a.spectrum, a.wavelet, fc); });
  const FitResult& fit = sel.result;

  write_spectrum_csv(out_file(c, "spectrum.csv"), a.spectrum);
  write_overlay_csv(out_file(c, "overlay.csv"), a.spectrum, fit);
  Json rep = report_head("fit", c);
  rep["input"] = input_json(input, a.path);
  rep["wavelet"] = wavelet_json(a.wavelet, c);
  rep["grid"] = to_json(a.spectrum.grid);
  const Json fit_json = to_json(fit);
  for (auto& [k, v] : fit_json.items()) rep[k] = v;
  Json attempts = Json::array();
  for (const auto& t : sel.attempts) {
    attempts.push_back(Json{{"K", t.K},
                            {"T_stat", t.T_stat},
                            {"dof", t.dof},
                            {"p_value", t.p_value},
                            {"accepted", t.accepted}});
  }
  rep["attempts"] = attempts;
  rep["notes"] = Json::array(
      {"design matrices use the realized refine-point frequencies f_i, not g_j(k) built from the "
       "unknown true change frequencies",
       "frequencies are raw Fourier variables (no 2 pi Hz conversion)"});
  rep["spectrum"] = "spectrum.csv";
  rep["overlay"] = "overlay.csv";
  write_json(out_file(c, "fit.json"), rep);
  write_text(out_file(c, "fit.cfg"), config_text(c));

  out << "K=" << fit.K << " T=" << format_number(fit.T_stat) << " dof=" << fit.dof
      << " p=" << format_number(fit.p_value) << (fit.accepted ? " accepted" : " rejected") << '\n';
  for (std::size_t j = 0; j < fit.segments.size(); ++j) {
    out << "  segment " << j << ": H=" << format_number(fit.segments[j].H)
        << " sigma2=" << format_number(fit.segments[j].sigma2)
        << (fit.segments[j].clamped ? " (clamped)" : "") << '\n';
  }
  for (std::size_t j = 0; j < fit.omegas.size(); ++j) {
    out << "  omega " << j + 1 << ": " << format_number(fit.omegas[j]) << '\n';
  }
  return fit.accepted ? kOk : kNotAccepted;
}

int cmd_montecarlo(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const BandWavelet w = staged("config", [&] { return wavelet_of(c); });
  McConfig mc;
  staged("config", [&] {
    if (!c.H_grid.empty()) {
      const double sigma = c.sigma2.empty() ? c.sigma.at(0) : std::sqrt(c.sigma2.at(0));
      for (double h : c.H_grid) {
        mc.cells.push_back({"H=" + format_number(h), ModelSpec::fbm(h, sigma)});
      }
    } else {
      mc.cells.push_back({"model", model_of(c)});
    }
    mc.N = c.N;
    mc.delta = c.delta;
    mc.f_min = c.f_min;
    mc.f_max = c.f_max;
    mc.r = c.r;
    mc.fit = fit_config_of(c);
    mc.replications = c.replications;
    mc.seed = c.seed;
    mc.workers = c.workers;
    mc.max_n = c.max_n;
    mc.validate();
  });
  const FrequencyGrid grid =
      staged("grid", [&] { return build_grid(mc.N, mc.delta, mc.f_min, mc.f_max, w); });

  std::size_t done = 0;
  const std::size_t total = mc.cells.size() * mc.replications;
  const McRun run = run_montecarlo(mc, w, [&](const McReplication& rec) {
    ++done;
    err << "[" << done << "/" << total << "] " << mc.cells[rec.cell].label << " rep "
        << rec.replication;
    if (!rec.ok) {
      err << " failed: " << rec.error;
    } else {
      const int k = rec.selected_K();
      err << " selected K=" << (k < 0 ? std::string("none") : std::to_string(k));
    }
    err << '\n';
  });
  const auto summaries = summarize(run);

  Json cells = Json::array();
  for (const auto& s : summaries) cells.push_back(to_json(s));
  // Null pools: T_K over every cell whose true order is K.
  Json pooled = Json::array();
  for (std::size_t K = 0; K <= mc.fit.K_max; ++K) {
    std::vector<double> T;
    std::size_t dof = 0;
    for (const auto& s : summaries) {
      if (s.true_K != K || K >= s.orders.size()) continue;
      T.insert(T.end(), s.orders[K].T.begin(), s.orders[K].T.end());
      dof = s.orders[K].dof;
    }
    if (T.empty()) continue;
    Json p{{"K", K}, {"samples", T.size()}, {"dof", dof}};
    if (T.size() >= 5 && dof > 0) {
      const double d = static_cast<double>(dof);
      const auto ks = ks_test(T, [d](double x) { return chi2_cdf(x, d); });
      p["ks_D"] = ks.D;
      p["ks_p"] = ks.p_value;
    }
    pooled.push_back(p);
  }

  write_montecarlo_csv(out_file(c, "raw.csv"), run);
  Json rep = report_head("montecarlo", c);
  rep["wavelet"] = wavelet_json(w, c);
  rep["grid"] = to_json(grid);
  rep["streams"] = "replication r of cell c uses stream c * 2^32 + r";
  rep["cells"] = cells;
  rep["pooled_null"] = pooled;
  rep["raw"] = "raw.csv";
  write_json(out_file(c, "table.json"), rep);
  write_text(out_file(c, "montecarlo.cfg"), config_text(c));

  for (const auto& s : summaries) {
    out << s.label << ": " << s.replications - s.failures << "/" << s.replications << " ok";
    if (s.true_K < s.orders.size() && s.orders[s.true_K].fitted > 0) {
      const auto& o = s.orders[s.true_K];
      out << ", K=" << s.true_K << " accepted " << o.accepted << "/" << o.fitted << ", H mean";
      for (double h : o.H_mean) out << ' ' << format_number(h);
    }
    out << '\n';
  }
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig c;
  std::string input;

  CLI::App app{"Multiscale fractional Brownian motion: simulation, wavelet spectrum, "
               "frequency change points and Hurst estimation",
               "mfbm"};
  app.set_config("--config", "", "Flat key=value file; flags override its values");
  app.require_subcommand(1, 1);
  app.fallthrough();

  app.add_option("--H", c.H, "Hurst indices, one per regime")->delimiter(',')->capture_default_str();
  app.add_option("--sigma", c.sigma, "Scales, one per regime")->delimiter(',')->capture_default_str();
  app.add_option("--sigma2", c.sigma2, "Squared scales (override --sigma)")->delimiter(',');
  app.add_option("--omega", c.omega, "Change frequencies, ascending")->delimiter(',');
  app.add_option("--H-grid", c.H_grid, "montecarlo: one FBM cell per value")->delimiter(',');
  app.add_option("--wavelet", c.wavelet, "bump | meyer-shifted | custom-table")->capture_default_str();
  app.add_option("--alpha", c.alpha, "Lower band edge")->capture_default_str();
  app.add_option("--beta", c.beta, "Upper band edge")->capture_default_str();
  app.add_option("--wavelet-table", c.wavelet_table, "Two-column (xi, psi_hat) file for custom-table");
  app.add_option("--f-min", c.f_min, "Lowest analyzed frequency")->capture_default_str();
  app.add_option("--f-max", c.f_max, "Highest analyzed frequency")->capture_default_str();
  app.add_option("--r", c.r, "Shift trimming fraction in (0, 1/3)")->capture_default_str();
  app.add_option("--m", c.m, "Refine points per segment")->capture_default_str();
  app.add_option("--level", c.level, "Test level")->capture_default_str();
  app.add_option("--k-max", c.K_max, "Largest number of change points tried")->capture_default_str();
  app.add_option("--sigma-convention", c.sigma_convention, "trimmed (2/(1-2r)) | plain (2)")
      ->capture_default_str();
  app.add_option("--N", c.N, "Samples (simulate, montecarlo)")->capture_default_str();
  app.add_option("--delta", c.delta, "Sampling step; also used for one-column input")
      ->capture_default_str();
  app.add_option("--seed", c.seed, "Random seed")->capture_default_str();
  app.add_option("--stream", c.stream, "simulate: stream index")->capture_default_str();
  app.add_option("--replications", c.replications, "montecarlo: replications per cell")
      ->capture_default_str();
  app.add_option("--max-n", c.max_n, "Largest N accepted by the dense sampler")->capture_default_str();
  app.add_option("-o,--out", c.out, "Output directory")->capture_default_str();
  app.add_option("--workers", c.workers, "montecarlo: concurrent replications")->capture_default_str();
  app.add_option("--threads", c.threads, "Threads per spectrum")->capture_default_str();
  app.add_option("--simd", c.simd, "auto | scalar | avx2")->capture_default_str();

  auto* sim = app.add_subcommand("simulate", "Draw one path; writes path.csv and path.json");
  auto* ana = app.add_subcommand("analyze", "Wavelet log-spectrum; writes spectrum.csv and analyze.json");
  auto* fit = app.add_subcommand("fit", "Change points, Hurst indices and the order test; writes fit.json");
  auto* mc = app.add_subcommand("montecarlo", "Replicated simulate + fit; writes table.json and raw.csv");
  ana->add_option("input", input, "Path CSV (value or time,value)")->required();
  fit->add_option("input", input, "Path CSV (value or time,value)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    apply_simd(c);
    if (sim->parsed()) return cmd_simulate(c, out);
    if (ana->parsed()) return cmd_analyze(c, input, out);
    if (fit->parsed()) return cmd_fit(c, input, out);
    if (mc->parsed()) return cmd_montecarlo(c, out, err);
  } catch (const NumericError& e) {
    err << "error: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumericFailure;
  }
  return kConfigError;
}

}  // namespace mfbm::cli
