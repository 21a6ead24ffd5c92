#include "fbmlt/io.h"
#include "fbmlt/errors.h"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace fbmlt {

namespace {

constexpr char kPathMagic[8] = {'F', 'B', 'M', 'P', 'A', 'T', 'H', '1'};
constexpr char kFieldMagic[8] = {'F', 'B', 'M', 'L', 'T', 'F', 'L', 'D'};
constexpr std::uint32_t kFormatVersion = 1;

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    std::reverse(b, b + sizeof(T));
    std::memcpy(&v, b, sizeof(T));
    return v;
  }
}

class Writer {
 public:
  explicit Writer(const std::filesystem::path& file) : out_(file, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open " + file.string() + " for writing");
  }
  void bytes(const char* p, std::size_t n) { out_.write(p, static_cast<std::streamsize>(n)); }
  template <class T>
  void put(T v) {
    v = to_little(v);
    bytes(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void doubles(std::span<const double> v) {
    for (double x : v) put(x);
  }
  void finish() {
    out_.flush();
    if (!out_) throw std::runtime_error("write failed");
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& file) : in_(file, std::ios::binary), name_(file.string()) {
    if (!in_) throw CorruptFileError("cannot open " + name_);
    in_.seekg(0, std::ios::end);
    remaining_ = static_cast<std::uint64_t>(in_.tellg());
    in_.seekg(0);
  }
  void bytes(char* p, std::size_t n) {
    if (n > remaining_) throw CorruptFileError(name_ + ": truncated");
    in_.read(p, static_cast<std::streamsize>(n));
    if (!in_) throw CorruptFileError(name_ + ": read failed");
    remaining_ -= n;
  }
  template <class T>
  T get() {
    T v;
    bytes(reinterpret_cast<char*>(&v), sizeof(T));
    return to_little(v);
  }
  std::vector<double> doubles(std::uint64_t n) {
    if (n > remaining_ / sizeof(double)) throw CorruptFileError(name_ + ": declared size exceeds file");
    std::vector<double> v(n);
    for (auto& x : v) x = get<double>();
    return v;
  }
  void expect_magic(const char (&magic)[8]) {
    char m[8];
    bytes(m, 8);
    if (std::memcmp(m, magic, 8) != 0) throw CorruptFileError(name_ + ": bad magic");
  }
  void expect_end() {
    if (remaining_ != 0) throw CorruptFileError(name_ + ": trailing bytes");
  }
  const std::string& name() const { return name_; }

 private:
  std::ifstream in_;
  std::string name_;
  std::uint64_t remaining_ = 0;
};

struct PathHeader {
  std::uint32_t kind = 0;
  double h = 0.5;
  std::uint64_t seed = 0;
  std::uint64_t replication = 0;
  std::uint32_t tag = 0;
  std::uint32_t substeps = 1;
  double t_start = 0.0, t_end = 1.0;
  std::uint64_t n_steps = 1, dim = 1;
  std::vector<double> x0;
};

void write_path_binary(const std::filesystem::path& file, const PathHeader& h, std::span<const double> values) {
  Writer w(file);
  w.bytes(kPathMagic, 8);
  w.put(kFormatVersion);
  w.put(h.kind);
  w.put(h.h);
  w.put(h.seed);
  w.put(h.replication);
  w.put(h.tag);
  w.put(h.substeps);
  w.put(h.t_start);
  w.put(h.t_end);
  w.put(h.n_steps);
  w.put(h.dim);
  w.doubles(h.x0);
  w.doubles(values);
  w.finish();
}

std::pair<PathHeader, std::vector<double>> read_path_binary(const std::filesystem::path& file,
                                                            std::uint32_t expected_kind) {
  Reader r(file);
  r.expect_magic(kPathMagic);
  if (r.get<std::uint32_t>() != kFormatVersion) throw CorruptFileError(r.name() + ": unsupported version");
  PathHeader h;
  h.kind = r.get<std::uint32_t>();
  if (h.kind != expected_kind) throw CorruptFileError(r.name() + ": wrong path kind");
  h.h = r.get<double>();
  h.seed = r.get<std::uint64_t>();
  h.replication = r.get<std::uint64_t>();
  h.tag = r.get<std::uint32_t>();
  h.substeps = r.get<std::uint32_t>();
  h.t_start = r.get<double>();
  h.t_end = r.get<double>();
  h.n_steps = r.get<std::uint64_t>();
  h.dim = r.get<std::uint64_t>();
  if (h.dim == 0 || h.n_steps == 0 || h.dim > (1u << 20) ||
      h.n_steps >= std::numeric_limits<std::uint64_t>::max() / (h.dim * 8))
    throw CorruptFileError(r.name() + ": implausible dimensions");
  if (!(h.h > 0.0 && h.h < 1.0) || !(h.t_end > h.t_start)) throw CorruptFileError(r.name() + ": bad header");
  h.x0 = r.doubles(h.dim);
  auto values = r.doubles(h.dim * (h.n_steps + 1));
  r.expect_end();
  return {std::move(h), std::move(values)};
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

} // namespace

void write_path_csv(const std::filesystem::path& file, const PathView& path) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot open " + file.string());
  out << std::setprecision(17) << "t";
  for (std::size_t i = 0; i < path.dim; ++i) out << ",component_" << i;
  out << '\n';
  for (std::size_t k = 0; k < path.grid.n_points(); ++k) {
    out << path.grid.time(k);
    for (std::size_t i = 0; i < path.dim; ++i) out << ',' << path.at(i, k);
    out << '\n';
  }
}

void write_fbm_binary(const std::filesystem::path& file, const FbmPath& path) {
  PathHeader h;
  h.kind = 0;
  h.h = path.hurst;
  h.seed = path.seed;
  h.replication = path.replication;
  h.tag = static_cast<std::uint32_t>(path.method);
  h.t_start = path.grid.t_start();
  h.t_end = path.grid.t_end();
  h.n_steps = path.grid.n_steps();
  h.dim = path.dim;
  h.x0.assign(path.dim, 0.0);
  write_path_binary(file, h, path.values);
}

void write_solution_binary(const std::filesystem::path& file, const SolutionPath& path) {
  PathHeader h;
  h.kind = 1;
  h.h = path.hurst;
  h.seed = path.driver_seed;
  h.tag = static_cast<std::uint32_t>(path.scheme);
  h.substeps = static_cast<std::uint32_t>(path.substeps);
  h.t_start = path.grid.t_start();
  h.t_end = path.grid.t_end();
  h.n_steps = path.grid.n_steps();
  h.dim = path.dim;
  h.x0 = path.x0;
  write_path_binary(file, h, path.values);
}

FbmPath read_fbm_binary(const std::filesystem::path& file) {
  auto [h, values] = read_path_binary(file, 0);
  if (h.tag > 1) throw CorruptFileError(file.string() + ": unknown method");
  FbmPath p{TimeGrid(h.t_start, h.t_end, h.n_steps), h.dim, std::move(values), h.h, h.seed, h.replication,
            static_cast<FbmMethod>(h.tag)};
  return p;
}

SolutionPath read_solution_binary(const std::filesystem::path& file) {
  auto [h, values] = read_path_binary(file, 1);
  if (h.tag > 2) throw CorruptFileError(file.string() + ": unknown scheme");
  SolutionPath p;
  p.grid = TimeGrid(h.t_start, h.t_end, h.n_steps);
  p.dim = h.dim;
  p.x0 = h.x0;
  p.values = std::move(values);
  p.scheme = static_cast<Scheme>(h.tag);
  p.substeps = h.substeps;
  p.driver_seed = h.seed;
  p.hurst = h.h;
  return p;
}

void write_field_csv(const std::filesystem::path& file, const LocalTimeField& field) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot open " + file.string());
  out << std::setprecision(17) << "t,x,value\n";
  for (std::size_t i = 0; i < field.n_t(); ++i)
    for (std::size_t j = 0; j < field.n_x(); ++j)
      out << field.t_grid[i] << ',' << field.x_grid[j] << ',' << field.at(i, j) << '\n';
}

void write_field_binary(const std::filesystem::path& file, const LocalTimeField& field) {
  Writer w(file);
  w.bytes(kFieldMagic, 8);
  w.put(kFormatVersion);
  w.put(static_cast<std::uint32_t>(field.kernel));
  w.put(field.a);
  w.put(field.epsilon);
  w.put(field.ball_constant);
  w.put(static_cast<std::uint64_t>(field.n_t()));
  w.put(static_cast<std::uint64_t>(field.n_x()));
  w.doubles(field.t_grid);
  w.doubles(field.x_grid);
  w.doubles(field.values);
  w.finish();
}

LocalTimeField read_field_binary(const std::filesystem::path& file) {
  Reader r(file);
  r.expect_magic(kFieldMagic);
  if (r.get<std::uint32_t>() != kFormatVersion) throw CorruptFileError(r.name() + ": unsupported version");
  LocalTimeField f;
  const auto kernel = r.get<std::uint32_t>();
  if (kernel > 1) throw CorruptFileError(r.name() + ": unknown kernel");
  f.kernel = static_cast<LocalTimeKernel>(kernel);
  f.a = r.get<double>();
  f.epsilon = r.get<double>();
  f.ball_constant = r.get<double>();
  const auto nt = r.get<std::uint64_t>();
  const auto nx = r.get<std::uint64_t>();
  if (nt == 0 || nx == 0 || nt > (1ull << 32) || nx > (1ull << 32)) throw CorruptFileError(r.name() + ": bad sizes");
  f.t_grid = r.doubles(nt);
  f.x_grid = r.doubles(nx);
  f.values = r.doubles(nt * nx);
  r.expect_end();
  return f;
}

std::string holder_json(const HolderEstimate& est, const std::vector<std::uint64_t>& seeds) {
  nlohmann::json j;
  j["exponent"] = est.exponent;
  j["stderr"] = est.slope_stderr;
  j["r2"] = est.r_squared;
  j["ladder"] = est.deltas;
  j["maxima"] = est.maxima;
  j["delta_range"] = {est.delta_min, est.delta_max};
  j["n_scales"] = est.n_scales;
  j["mode"] = std::string(to_string(est.mode));
  j["resolution_capped"] = est.resolution_capped;
  j["seeds"] = seeds;
  return j.dump();
}

void append_holder_log(const std::filesystem::path& file, const std::string& label, const HolderEstimate& est) {
  const bool fresh = !std::filesystem::exists(file) || std::filesystem::file_size(file) == 0;
  std::ofstream out(file, std::ios::app);
  if (!out) throw std::runtime_error("cannot open " + file.string());
  if (fresh) out << "label,mode,exponent,stderr,r2,delta_min,delta_max,n_scales,resolution_capped\n";
  out << label << ',' << to_string(est.mode) << ',' << fmt(est.exponent) << ',' << fmt(est.slope_stderr) << ','
      << fmt(est.r_squared) << ',' << fmt(est.delta_min) << ',' << fmt(est.delta_max) << ',' << est.n_scales << ','
      << (est.resolution_capped ? 1 : 0) << '\n';
}

} // namespace fbmlt
