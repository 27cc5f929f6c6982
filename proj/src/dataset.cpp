#include "keceni/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "keceni/error.hpp"

namespace keceni {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_real(const std::string& s, const std::string& where) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw InputError(where + ": cannot parse '" + s + "' as a number");
  return v;
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path, std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InputError(path.string() + ": empty file");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  header = split_row(line);
  std::vector<std::vector<std::string>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto row = split_row(line);
    if (row.size() != header.size())
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                       " columns, found " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_real(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

bool Dataset::has_outcome(NodeId i) const { return !std::isnan(y[i]); }

void Dataset::validate() const {
  const auto n = graph.size();
  if (y.size() != n || t.size() != n || static_cast<std::size_t>(x.rows()) != n)
    throw InputError("dataset arrays do not match the node count " + std::to_string(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (t[i] != 0 && t[i] != 1) throw InputError("treatment must be 0/1 (node " + std::to_string(i) + ")");
    for (Eigen::Index c = 0; c < x.cols(); ++c)
      if (!std::isfinite(x(i, c))) throw InputError("covariate is NaN or infinite (node " + std::to_string(i) + ")");
  }
  if (!ids.empty() && ids.size() != n) throw InputError("id list does not match the node count");
}

Dataset make_dataset(Graph graph, std::vector<double> y, std::vector<int> t, Eigen::MatrixXd x) {
  Dataset ds;
  const auto n = graph.size();
  ds.graph = std::move(graph);
  ds.y = std::move(y);
  ds.t = std::move(t);
  ds.x = std::move(x);
  const auto width = std::to_string(n > 0 ? n - 1 : 0).size();
  ds.ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto s = std::to_string(i);
    ds.ids.push_back(std::string(width - s.size(), '0') + s);
  }
  for (Eigen::Index c = 0; c < ds.x.cols(); ++c) ds.covariate_names.push_back("x" + std::to_string(c + 1));
  ds.validate();
  return ds;
}

Dataset load_dataset(const std::filesystem::path& node_csv, const std::filesystem::path& edge_csv) {
  std::vector<std::string> header;
  const auto rows = read_csv(node_csv, header);
  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InputError(node_csv.string() + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto c_id = column("id");
  const auto c_y = column("y");
  const auto c_t = column("t");
  std::vector<std::size_t> c_x;
  std::vector<std::string> x_names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == c_id || c == c_y || c == c_t) continue;
    c_x.push_back(c);
    x_names.push_back(header[c]);
  }

  std::map<std::string, std::size_t> by_id;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!by_id.emplace(rows[r][c_id], r).second)
      throw InputError(node_csv.string() + ": duplicate node id '" + rows[r][c_id] + "'");
  }
  const std::size_t n = by_id.size();
  std::vector<std::string> ids;
  std::map<std::string, NodeId> dense;
  ids.reserve(n);
  for (const auto& [id, r] : by_id) {
    dense.emplace(id, static_cast<NodeId>(ids.size()));
    ids.push_back(id);
  }

  std::vector<double> y(n);
  std::vector<int> t(n);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(c_x.size()));
  for (const auto& [id, r] : by_id) {
    const auto i = dense.at(id);
    const auto& row = rows[r];
    const std::string where = node_csv.string() + " (id " + id + ")";
    y[i] = row[c_y].empty() || row[c_y] == "NA" ? std::nan("") : parse_real(row[c_y], where);
    const double tv = parse_real(row[c_t], where);
    if (tv != 0.0 && tv != 1.0) throw InputError(where + ": treatment must be 0/1, got " + row[c_t]);
    t[i] = static_cast<int>(tv);
    for (std::size_t k = 0; k < c_x.size(); ++k) {
      const double v = row[c_x[k]].empty() ? std::nan("") : parse_real(row[c_x[k]], where);
      if (!std::isfinite(v)) throw InputError(where + ": covariate '" + x_names[k] + "' is NaN or missing");
      x(i, static_cast<Eigen::Index>(k)) = v;
    }
  }

  std::vector<std::string> eheader;
  const auto erows = read_csv(edge_csv, eheader);
  const auto src = std::find(eheader.begin(), eheader.end(), "src");
  const auto dst = std::find(eheader.begin(), eheader.end(), "dst");
  if (src == eheader.end() || dst == eheader.end()) throw InputError(edge_csv.string() + ": expected columns src,dst");
  const auto c_src = static_cast<std::size_t>(src - eheader.begin());
  const auto c_dst = static_cast<std::size_t>(dst - eheader.begin());
  std::vector<Edge> edges;
  edges.reserve(erows.size());
  for (const auto& row : erows) {
    auto lookup = [&](const std::string& id) {
      const auto it = dense.find(id);
      if (it == dense.end()) throw InputError(edge_csv.string() + ": edge references unknown node id '" + id + "'");
      return it->second;
    };
    edges.emplace_back(lookup(row[c_src]), lookup(row[c_dst]));
  }

  Dataset ds;
  ds.graph = Graph::build(n, edges);
  ds.y = std::move(y);
  ds.t = std::move(t);
  ds.x = std::move(x);
  ds.ids = std::move(ids);
  ds.covariate_names = std::move(x_names);
  ds.validate();
  return ds;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& node_csv, const std::filesystem::path& edge_csv) {
  std::ofstream nodes(node_csv);
  if (!nodes) throw InputError("cannot write " + node_csv.string());
  nodes << "id,y,t";
  for (std::size_t c = 0; c < ds.covariate_width(); ++c)
    nodes << ',' << (c < ds.covariate_names.size() ? ds.covariate_names[c] : "x" + std::to_string(c + 1));
  nodes << '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    nodes << ds.ids[i] << ',' << (ds.has_outcome(static_cast<NodeId>(i)) ? format_real(ds.y[i]) : "") << ',' << ds.t[i];
    for (Eigen::Index c = 0; c < ds.x.cols(); ++c) nodes << ',' << format_real(ds.x(static_cast<Eigen::Index>(i), c));
    nodes << '\n';
  }
  std::ofstream edges(edge_csv);
  if (!edges) throw InputError("cannot write " + edge_csv.string());
  edges << "src,dst\n";
  for (const auto& [i, j] : ds.graph.edges()) edges << ds.ids[i] << ',' << ds.ids[j] << '\n';
}

NodeId node_index(const Dataset& ds, const std::string& id) {
  const auto it = std::lower_bound(ds.ids.begin(), ds.ids.end(), id);
  if (it != ds.ids.end() && *it == id) return static_cast<NodeId>(it - ds.ids.begin());
  // ids from make_dataset are sorted; anything else falls back to a scan.
  const auto lin = std::find(ds.ids.begin(), ds.ids.end(), id);
  if (lin == ds.ids.end()) throw InputError("unknown node id '" + id + "'");
  return static_cast<NodeId>(lin - ds.ids.begin());
}

void standardize_covariates(Dataset& ds) {
  for (Eigen::Index c = 0; c < ds.x.cols(); ++c) {
    auto col = ds.x.col(c);
    const double mean = col.mean();
    col.array() -= mean;
    const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(std::max<Eigen::Index>(1, col.size() - 1)));
    if (sd > 0.0) col /= sd;
  }
}

}  // namespace keceni
