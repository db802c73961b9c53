#include "clab/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace clab {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << std::setprecision(17);
  return out;
}

}  // namespace

void save_environment(const Environment& env, const std::string& path) {
  nlohmann::json header = {
      {"format", 1},
      {"d", env.g.d},
      {"side", env.g.side},
      {"sampler", env.meta.sampler},
      {"params", env.meta.params},
      {"seed", env.meta.seed},
  };
  auto out = open_out(path);
  out << header.dump() << "\n";
  for (const Edge& e : env.edges()) out << e.a << "," << e.b << "," << e.w << "\n";
}

Environment load_environment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open environment file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty environment file: " + path);
  const nlohmann::json header = nlohmann::json::parse(line);
  if (header.at("format").get<int>() != 1)
    throw std::runtime_error("unsupported environment format");
  Geometry g(header.at("d").get<int>(), header.at("side").get<int>());
  EnvMeta meta{header.at("sampler").get<std::string>(), header.at("params").get<std::string>(),
               header.at("seed").get<std::uint64_t>()};
  std::vector<Edge> edges;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Edge e;
    char c1, c2;
    std::istringstream row(line);
    if (!(row >> e.a >> c1 >> e.b >> c2 >> e.w) || c1 != ',' || c2 != ',')
      throw std::runtime_error("malformed edge row: " + line);
    edges.push_back(e);
  }
  Environment env = Environment::from_edges(g, std::move(edges), std::move(meta));
  env.validate();
  return env;
}

void save_trajectory(const Trajectory& traj, const std::string& path) {
  auto out = open_out(path);
  out << "time,site_index\n";
  for (std::size_t k = 0; k < traj.sites.size(); ++k)
    out << traj.times[k] << "," << traj.sites[k] << "\n";
}

void save_corrector(const CorrectorField& field, const std::string& path) {
  auto out = open_out(path);
  out << "site_index";
  for (int i = 0; i < field.chi.cols(); ++i) out << ",chi_" << (i + 1);
  out << "\n";
  for (Index x = 0; x < field.chi.rows(); ++x) {
    out << x;
    for (int i = 0; i < field.chi.cols(); ++i) out << "," << field.chi(x, i);
    out << "\n";
  }
}

void save_sigma(const Eigen::MatrixXd& sigma, double residual, const std::string& path) {
  nlohmann::json obj;
  obj["d"] = sigma.rows();
  obj["residual"] = residual;
  auto& rows = obj["sigma"];
  for (Index i = 0; i < sigma.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index j = 0; j < sigma.cols(); ++j) row.push_back(sigma(i, j));
    rows.push_back(row);
  }
  open_out(path) << obj.dump(2) << "\n";
}

void save_checks(const std::vector<BoundCheck>& checks, const std::string& jsonPath,
                 const std::string& csvPath) {
  nlohmann::json arr = nlohmann::json::array();
  for (const BoundCheck& c : checks)
    arr.push_back({{"name", c.name},
                   {"lhs", c.lhs},
                   {"rhs", c.rhs},
                   {"margin", c.margin},
                   {"fitted", c.fitted},
                   {"pass", c.pass}});
  open_out(jsonPath) << arr.dump(2) << "\n";
  auto csv = open_out(csvPath);
  csv << "name,lhs,rhs,margin,fitted,pass\n";
  for (const BoundCheck& c : checks)
    csv << c.name << "," << c.lhs << "," << c.rhs << "," << c.margin << "," << c.fitted << ","
        << (c.pass ? 1 : 0) << "\n";
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for digest: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return fnv1a(buf.str());
}

}  // namespace clab
