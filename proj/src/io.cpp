#include "areal/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace areal {

namespace {

std::string format_with(double v, std::chars_format fmt, int precision) {
  char buf[64];
  std::to_chars_result res;
  if (precision >= 0)
    res = std::to_chars(buf, buf + sizeof(buf), v, fmt, precision);
  else
    res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, const std::string& context) {
  double out = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  auto res = std::from_chars(b, e, out);
  if (res.ec != std::errc() || res.ptr != e)
    throw data_error(context + ": bad number '" + s + "'");
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw data_error("cannot open '" + path + "' for writing");
  return f;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw data_error("cannot open '" + path + "'");
  return f;
}

}  // namespace

std::string format_number(double v) {
  return format_with(v, std::chars_format::general, 6);
}

std::string format_full(double v) {
  return format_with(v, std::chars_format::general, -1);
}

void write_data_csv(const std::string& path, const Dataset& data) {
  auto f = open_out(path);
  f << "region,y";
  for (std::size_t j = 0; j < data.covariate_names.size(); ++j)
    f << ',' << data.covariate_names[j];
  f << '\n';
  for (Index i = 0; i < data.y.size(); ++i) {
    if (data.regions[i].find(',') != std::string::npos)
      throw data_error("data csv: label contains a comma");
    f << data.regions[i] << ',' << format_full(data.y[i]);
    for (Index j = 0; j < data.covariates.cols(); ++j)
      f << ',' << format_full(data.covariates(i, j));
    f << '\n';
  }
}

Dataset read_data_csv(const std::string& path) {
  auto f = open_in(path);
  std::string line;
  if (!std::getline(f, line)) throw data_error("data csv: empty file");
  const auto header = split_csv(strip_cr(line));
  if (header.size() < 2 || header[0] != "region" || header[1] != "y")
    throw data_error("data csv: header must start with 'region,y'");
  Dataset out;
  out.covariate_names.assign(header.begin() + 2, header.end());
  std::vector<double> ys;
  std::vector<std::vector<double>> cov_rows;
  std::size_t rownum = 1;
  while (std::getline(f, line)) {
    ++rownum;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size())
      throw data_error("data csv: row " + std::to_string(rownum) +
                       " has wrong column count");
    out.regions.push_back(cells[0]);
    ys.push_back(parse_double(cells[1], "data csv"));
    std::vector<double> row;
    for (std::size_t j = 2; j < cells.size(); ++j)
      row.push_back(parse_double(cells[j], "data csv"));
    cov_rows.push_back(std::move(row));
  }
  const Index n = static_cast<Index>(ys.size());
  const Index q = static_cast<Index>(out.covariate_names.size());
  out.y = Eigen::Map<Vector>(ys.data(), n);
  out.covariates.resize(n, q);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < q; ++j) out.covariates(i, j) = cov_rows[i][j];
  return out;
}

AlignedData align_to_graph(const Dataset& data, const AdjacencyGraph& g) {
  if (static_cast<Index>(data.regions.size()) != g.n)
    throw data_error("data/graph mismatch: " +
                     std::to_string(data.regions.size()) + " data rows vs " +
                     std::to_string(g.n) + " regions");
  std::map<std::string, Index> pos;
  for (Index i = 0; i < g.n; ++i) pos[g.labels[i]] = i;
  std::vector<char> seen(g.n, 0);
  AlignedData out;
  const Index q = data.covariates.cols();
  out.x.resize(g.n, q + 1);
  out.y.resize(g.n);
  for (Index r = 0; r < g.n; ++r) {
    const auto it = pos.find(data.regions[r]);
    if (it == pos.end())
      throw data_error("data region '" + data.regions[r] +
                       "' is not in the adjacency graph");
    if (seen[it->second])
      throw data_error("data region '" + data.regions[r] + "' repeats");
    seen[it->second] = 1;
    out.x(it->second, 0) = 1.0;
    for (Index j = 0; j < q; ++j)
      out.x(it->second, j + 1) = data.covariates(r, j);
    out.y[it->second] = data.y[r];
  }
  return out;
}

void write_truth_csv(const std::string& path, const AdjacencyGraph& g,
                     const std::vector<std::pair<Index, Index>>& pairs,
                     const Vector& std_diffs) {
  auto f = open_out(path);
  f << "region_i,region_j,std_diff\n";
  for (Index k = 0; k < std_diffs.size(); ++k) {
    const auto& [i, j] = pairs[k];
    f << g.labels[i] << ',' << g.labels[j] << ','
      << format_full(std_diffs[k]) << '\n';
  }
}

TruthFile read_truth_csv(const std::string& path) {
  auto f = open_in(path);
  std::string line;
  if (!std::getline(f, line) ||
      strip_cr(line) != "region_i,region_j,std_diff")
    throw data_error("truth csv: bad header");
  TruthFile out;
  std::vector<double> vals;
  while (std::getline(f, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 3) throw data_error("truth csv: bad row");
    out.pairs.emplace_back(cells[0], cells[1]);
    vals.push_back(parse_double(cells[2], "truth csv"));
  }
  out.std_diffs = Eigen::Map<Vector>(vals.data(), vals.size());
  return out;
}

namespace {

void append_draw_header(std::ofstream& f, Index p, Index n) {
  f << "chain";
  for (Index j = 0; j < p; ++j) f << ",beta_" << j;
  for (Index j = 0; j < n; ++j) f << ",gamma_" << j;
  for (Index j = 0; j < n; ++j) f << ",phi_" << j;
  f << ",sigma2,rho\n";
}

}  // namespace

void write_draws_csv(const std::string& path,
                     const std::vector<PosteriorDraws>& chains) {
  if (chains.empty()) throw data_error("write_draws_csv: no chains");
  auto f = open_out(path);
  const Index p = chains[0].beta.cols();
  const Index n = chains[0].gamma.cols();
  append_draw_header(f, p, n);
  for (const PosteriorDraws& d : chains) {
    for (Index t = 0; t < d.size(); ++t) {
      f << d.meta.chain_id;
      for (Index j = 0; j < p; ++j) f << ',' << format_full(d.beta(t, j));
      for (Index j = 0; j < n; ++j) f << ',' << format_full(d.gamma(t, j));
      for (Index j = 0; j < n; ++j) f << ',' << format_full(d.phi(t, j));
      f << ',' << format_full(d.sigma2[t]) << ',' << format_full(d.rho[t])
        << '\n';
    }
  }
}

PosteriorDraws read_draws_csv(const std::string& path) {
  auto f = open_in(path);
  std::string line;
  if (!std::getline(f, line)) throw data_error("draws csv: empty file");
  const auto header = split_csv(strip_cr(line));
  Index p = 0, n = 0;
  for (const auto& h : header) {
    if (h.rfind("beta_", 0) == 0) ++p;
    if (h.rfind("gamma_", 0) == 0) ++n;
  }
  const std::size_t expect = 1 + static_cast<std::size_t>(p + 2 * n) + 2;
  if (header.size() != expect || header[0] != "chain")
    throw data_error("draws csv: unexpected header layout");

  std::vector<std::vector<double>> rows;
  std::size_t rownum = 1;
  while (std::getline(f, line)) {
    ++rownum;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != expect)
      throw data_error("draws csv: row " + std::to_string(rownum) +
                       " has wrong column count");
    std::vector<double> row(cells.size() - 1);
    for (std::size_t j = 1; j < cells.size(); ++j)
      row[j - 1] = parse_double(cells[j], "draws csv");
    rows.push_back(std::move(row));
  }
  const Index num = static_cast<Index>(rows.size());
  if (num == 0) throw data_error("draws csv: no draws");
  PosteriorDraws out;
  out.beta.resize(num, p);
  out.gamma.resize(num, n);
  out.phi.resize(num, n);
  out.sigma2.resize(num);
  out.rho.resize(num);
  for (Index t = 0; t < num; ++t) {
    Index c = 0;
    for (Index j = 0; j < p; ++j) out.beta(t, j) = rows[t][c++];
    for (Index j = 0; j < n; ++j) out.gamma(t, j) = rows[t][c++];
    for (Index j = 0; j < n; ++j) out.phi(t, j) = rows[t][c++];
    out.sigma2[t] = rows[t][c++];
    out.rho[t] = rows[t][c++];
  }
  out.meta.method = "file";
  return out;
}

namespace {

constexpr char draws_magic[4] = {'A', 'R', 'D', 'W'};

void put_u32(std::ofstream& f, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  f.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::ifstream& f) {
  unsigned char b[4];
  f.read(reinterpret_cast<char*>(b), 4);
  if (!f) throw data_error("draws binary: truncated header");
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_draws_binary(const std::string& path,
                        const std::vector<PosteriorDraws>& chains) {
  if (chains.empty()) throw data_error("write_draws_binary: no chains");
  const Index p = chains[0].beta.cols();
  const Index n = chains[0].gamma.cols();
  Index total = 0;
  for (const auto& c : chains) total += c.size();
  const Index dim = p + 2 * n + 2;

  // Assemble in column-major order over the stacked draw matrix.
  Matrix stacked(total, dim);
  Index row = 0;
  for (const auto& c : chains) {
    const Index m = c.size();
    stacked.block(row, 0, m, p) = c.beta;
    stacked.block(row, p, m, n) = c.gamma;
    stacked.block(row, p + n, m, n) = c.phi;
    stacked.col(p + 2 * n).segment(row, m) = c.sigma2;
    stacked.col(p + 2 * n + 1).segment(row, m) = c.rho;
    row += m;
  }

  auto f = open_out(path);
  f.write(draws_magic, 4);
  put_u32(f, 1u);
  put_u32(f, static_cast<std::uint32_t>(total));
  put_u32(f, static_cast<std::uint32_t>(dim));
  static_assert(sizeof(double) == 8);
  f.write(reinterpret_cast<const char*>(stacked.data()),
          static_cast<std::streamsize>(sizeof(double)) * total * dim);
}

PosteriorDraws read_draws_binary(const std::string& path, Index p) {
  auto f = open_in(path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, draws_magic, 4) != 0)
    throw data_error("draws binary: bad magic");
  const std::uint32_t version = get_u32(f);
  if (version != 1u) throw data_error("draws binary: unsupported version");
  const Index total = static_cast<Index>(get_u32(f));
  const Index dim = static_cast<Index>(get_u32(f));
  if ((dim - p - 2) % 2 != 0 || dim <= p + 2)
    throw data_error("draws binary: dim does not match the design width");
  const Index n = (dim - p - 2) / 2;

  Matrix stacked(total, dim);
  f.read(reinterpret_cast<char*>(stacked.data()),
         static_cast<std::streamsize>(sizeof(double)) * total * dim);
  if (!f) throw data_error("draws binary: truncated payload");

  PosteriorDraws out;
  out.beta = stacked.leftCols(p);
  out.gamma = stacked.middleCols(p, n);
  out.phi = stacked.middleCols(p + n, n);
  out.sigma2 = stacked.col(p + 2 * n);
  out.rho = stacked.col(p + 2 * n + 1);
  out.meta.method = "file";
  return out;
}

void write_disparities_csv(const std::string& path, const AdjacencyGraph& g,
                           const std::vector<std::pair<Index, Index>>& pairs,
                           const Vector& v,
                           const std::vector<std::uint8_t>& decisions) {
  if (static_cast<Index>(pairs.size()) != v.size() ||
      pairs.size() != decisions.size())
    throw data_error("disparities csv: length mismatch");
  std::vector<Index> order(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k)
    order[k] = static_cast<Index>(k);
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (v[a] != v[b]) return v[a] > v[b];
    const auto& la = g.labels[pairs[a].first];
    const auto& lb = g.labels[pairs[b].first];
    if (la != lb) return la < lb;
    return g.labels[pairs[a].second] < g.labels[pairs[b].second];
  });
  auto f = open_out(path);
  f << "region_i,region_j,v_ij,decision\n";
  for (Index k : order) {
    f << g.labels[pairs[k].first] << ',' << g.labels[pairs[k].second] << ','
      << format_number(v[k]) << ',' << int(decisions[k]) << '\n';
  }
}

DisparityFile read_disparities_csv(const std::string& path) {
  auto f = open_in(path);
  std::string line;
  if (!std::getline(f, line) ||
      strip_cr(line) != "region_i,region_j,v_ij,decision")
    throw data_error("disparities csv: bad header");
  DisparityFile out;
  std::vector<double> vs;
  while (std::getline(f, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 4) throw data_error("disparities csv: bad row");
    out.pairs.emplace_back(cells[0], cells[1]);
    vs.push_back(parse_double(cells[2], "disparities csv"));
    const double d = parse_double(cells[3], "disparities csv");
    if (d != 0.0 && d != 1.0)
      throw data_error("disparities csv: decision must be 0 or 1");
    out.decisions.push_back(d != 0.0);
  }
  out.v = Eigen::Map<Vector>(vs.data(), vs.size());
  return out;
}

void write_curve_csv(const std::string& path, const Vector& t,
                     const Vector& fdr, const Vector& fnr) {
  auto f = open_out(path);
  f << "t,fdr,fnr\n";
  for (Index i = 0; i < t.size(); ++i)
    f << format_number(t[i]) << ',' << format_number(fdr[i]) << ','
      << format_number(fnr[i]) << '\n';
}

void write_scan_csv(const std::string& path, const EntropyScan& scan) {
  auto f = open_out(path);
  f << "epsilon,loss\n";
  for (Index i = 0; i < scan.epsilon_grid.size(); ++i)
    f << format_number(scan.epsilon_grid[i]) << ','
      << format_number(scan.loss[i]) << '\n';
}

}  // namespace areal
