#include "mfbm/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "mfbm/error.hpp"

namespace mfbm {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',' || ch == ';' || ch == '\t' || ch == ' ') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

bool parse_double(const std::string& s, double& v) {
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (b != e && *b == '+') ++b;
  const auto r = std::from_chars(b, e, v);
  return r.ec == std::errc() && r.ptr == e;
}

std::ofstream open_out(const std::string& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ArgumentError("cannot write '" + file + "'");
  return out;
}

Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

std::string format_number(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

SampledPath read_path_csv(const std::string& file, std::optional<double> delta) {
  std::ifstream in(file);
  if (!in) throw ArgumentError("cannot open input '" + file + "'");
  std::vector<double> t, v;
  std::size_t columns = 0;
  std::string line;
  std::size_t lineno = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto fields = split_fields(line);
    if (fields.empty() || fields.front().front() == '#') continue;
    std::vector<double> nums(fields.size());
    bool numeric = true;
    for (std::size_t i = 0; i < fields.size(); ++i) numeric &= parse_double(fields[i], nums[i]);
    if (!numeric) {
      if (!seen_data) {
        seen_data = true;  // header line
        continue;
      }
      throw ArgumentError(file + ":" + std::to_string(lineno) + ": non-numeric field");
    }
    seen_data = true;
    if (columns == 0) {
      columns = nums.size();
      if (columns > 2) {
        throw ArgumentError(file + ": expected one (value) or two (time, value) columns");
      }
    } else if (nums.size() != columns) {
      throw ArgumentError(file + ":" + std::to_string(lineno) + ": inconsistent column count");
    }
    if (columns == 1) {
      v.push_back(nums[0]);
    } else {
      t.push_back(nums[0]);
      v.push_back(nums[1]);
    }
  }
  SampledPath path;
  path.values = std::move(v);
  if (path.values.size() < 2) throw ArgumentError(file + ": needs at least 2 samples");
  if (columns == 2) {
    const double step = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    if (!(step > 0.0)) throw ArgumentError(file + ": time column must increase");
    for (std::size_t i = 1; i < t.size(); ++i) {
      if (std::abs((t[i] - t[i - 1]) - step) > 1e-9 * step) {
        throw ArgumentError(file + ": time column is not uniformly spaced near row " +
                            std::to_string(i + 1));
      }
    }
    path.delta = step;
  } else {
    if (!delta) throw ArgumentError(file + ": single-column input needs a sampling step (delta)");
    path.delta = *delta;
  }
  path.validate();
  return path;
}

void write_path_csv(const std::string& file, const SampledPath& path) {
  auto out = open_out(file);
  out << "time,value\n";
  for (std::size_t i = 0; i < path.size(); ++i) {
    out << format_number(static_cast<double>(i + 1) * path.delta) << ','
        << format_number(path.values[i]) << '\n';
  }
}

void write_spectrum_csv(const std::string& file, const WaveletSpectrum& spec) {
  auto out = open_out(file);
  out << "f,log_f,Y,count\n";
  for (std::size_t i = 0; i < spec.Y.size(); ++i) {
    out << format_number(spec.grid.f[i]) << ',' << format_number(std::log(spec.grid.f[i])) << ','
        << format_number(spec.Y[i]) << ',' << spec.counts[i] << '\n';
  }
}

void write_overlay_csv(const std::string& file, const WaveletSpectrum& spec, const FitResult& fit) {
  auto out = open_out(file);
  out << "segment,role,log_f,Y,fitted\n";
  const auto& seg = fit.segmentation;
  const std::size_t tau = spec.grid.tau;
  for (std::size_t j = 0; j + 1 < seg.T.size(); ++j) {
    for (std::size_t i = seg.first(j); i <= seg.last(j, tau); ++i) {
      const double x = std::log(spec.grid.f[i]);
      out << j << ",regression," << format_number(x) << ',' << format_number(spec.Y[i]) << ','
          << format_number(seg.lambda[j](x)) << '\n';
    }
  }
  for (std::size_t j = 0; j < fit.segments.size(); ++j) {
    for (auto i : fit.segments[j].points) {
      const double x = std::log(spec.grid.f[i]);
      out << j << ",refine," << format_number(x) << ',' << format_number(spec.Y[i]) << ','
          << format_number(fit.segments[j].lambda(x)) << '\n';
    }
  }
}

void write_text(const std::string& file, const std::string& text) {
  auto out = open_out(file);
  out << text;
}

Json to_json(const ModelSpec& model) {
  return Json{{"K", model.K()}, {"omega", model.omega}, {"H", model.H}, {"sigma", model.sigma}};
}

Json to_json(const FrequencyGrid& grid) {
  return Json{{"f_min", grid.f_min}, {"f_max", grid.f_max}, {"alpha", grid.alpha},
              {"beta", grid.beta},   {"N", grid.N},         {"delta", grid.delta},
              {"a_N", grid.a_N},     {"q", grid.q},         {"tau", grid.tau},
              {"warnings", grid.warnings}};
}

Json to_json(const SegmentEstimate& s) {
  return Json{{"H", s.H},
              {"sigma2", s.sigma2},
              {"clamped", s.clamped},
              {"slope", s.lambda.slope},
              {"intercept", s.lambda.intercept},
              {"points", s.points},
              {"flavor", std::string(flavor_name(s.flavor))},
              {"ridge", s.ridge},
              {"Sigma", matrix_json(s.Sigma)},
              {"Gamma", matrix_json(s.Gamma)}};
}

Json to_json(const FitResult& fit) {
  Json segs = Json::array(), ols = Json::array(), lines = Json::array();
  for (const auto& s : fit.segments) segs.push_back(to_json(s));
  for (const auto& s : fit.ols) ols.push_back(to_json(s));
  for (const auto& l : fit.segmentation.lambda) {
    lines.push_back(Json{{"slope", l.slope}, {"intercept", l.intercept}});
  }
  return Json{{"K", fit.K},
              {"omegas", fit.omegas},
              {"breakpoints", fit.segmentation.T},
              {"Q", fit.segmentation.Q},
              {"criterion_lines", lines},
              {"segments", segs},
              {"ols", ols},
              {"T_stat", fit.T_stat},
              {"dof", fit.dof},
              {"p_value", fit.p_value},
              {"level", fit.level},
              {"accepted", fit.accepted},
              {"sigma_convention", std::string(sigma_convention_name(fit.convention))}};
}

Json to_json(const CellSummary& cell) {
  Json orders = Json::array();
  for (const auto& o : cell.orders) {
    orders.push_back(Json{{"K", o.K},
                          {"fitted", o.fitted},
                          {"accepted", o.accepted},
                          {"H_mean", o.H_mean},
                          {"H_sd", o.H_sd},
                          {"H_ols_mean", o.H_ols_mean},
                          {"H_ols_sd", o.H_ols_sd},
                          {"omega_mean", o.omega_mean},
                          {"omega_sd", o.omega_sd},
                          {"dof", o.dof},
                          {"ks_D", o.ks_D},
                          {"ks_p", o.ks_p},
                          {"T", o.T}});
  }
  Json selected = Json::object();
  for (std::size_t k = 0; k < cell.selected.size(); ++k) {
    selected[k + 1 == cell.selected.size() ? "none" : std::to_string(k)] = cell.selected[k];
  }
  return Json{{"label", cell.label},       {"true_K", cell.true_K},
              {"replications", cell.replications}, {"failures", cell.failures},
              {"selected_K", selected},    {"orders", orders}};
}

void write_montecarlo_csv(const std::string& file, const McRun& run) {
  auto out = open_out(file);
  out << "cell,replication,stream,K,ok,T,dof,p_value,accepted,H,H_ols,sigma2,omega,error\n";
  auto join = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + format_number(v[i]);
    return s;
  };
  auto quote = [](std::string s) {
    std::replace(s.begin(), s.end(), '"', '\'');
    return '"' + s + '"';
  };
  for (const auto& rec : run.replications) {
    const std::string label = run.config.cells[rec.cell].label;
    if (!rec.ok) {
      out << label << ',' << rec.replication << ',' << rec.stream << ",,0,,,,,,,,," << quote(rec.error)
          << '\n';
      continue;
    }
    for (std::size_t K = 0; K < rec.orders.size(); ++K) {
      const auto& o = rec.orders[K];
      out << label << ',' << rec.replication << ',' << rec.stream << ',' << K << ','
          << (o.ok ? 1 : 0) << ',';
      if (o.ok) {
        out << format_number(o.T) << ',' << o.dof << ',' << format_number(o.p_value) << ','
            << (o.accepted ? 1 : 0) << ',' << join(o.H) << ',' << join(o.H_ols) << ','
            << join(o.sigma2) << ',' << join(o.omegas) << ",\n";
      } else {
        out << ",,,,,,,," << quote(o.error) << '\n';
      }
    }
  }
}

}  // namespace mfbm
