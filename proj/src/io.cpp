#include "blvm/io.hpp"

#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace blvm {

std::string fmt_double(double x) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& tok, const std::string& path) {
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  require(res.ec == std::errc() && res.ptr == tok.data() + tok.size(), ErrorCode::data,
          "bad numeric field '" + tok + "' in " + path);
  return v;
}

std::ifstream open_in(const std::string& path, bool binary) {
  std::ifstream f(path, binary ? std::ios::binary : std::ios::in);
  require(f.good(), ErrorCode::data, "cannot open " + path);
  return f;
}

std::ofstream open_out(const std::string& path, bool binary) {
  std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
  require(f.good(), ErrorCode::data, "cannot write " + path);
  return f;
}

bool has_suffix(const std::string& s, const std::string& suf) {
  return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

void write_i64(std::ofstream& f, std::int64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff);
  f.write(reinterpret_cast<const char*>(b), 8);
}

std::int64_t read_i64(std::ifstream& f, const std::string& path) {
  unsigned char b[8];
  f.read(reinterpret_cast<char*>(b), 8);
  require(f.gcount() == 8, ErrorCode::data, "truncated binary header in " + path);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return static_cast<std::int64_t>(v);
}

void write_f64(std::ofstream& f, const double* data, std::size_t count) {
  // doubles are written little-endian byte by byte so the format is fixed
  std::vector<unsigned char> buf(count * 8);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, &data[i], 8);
    for (int b = 0; b < 8; ++b) buf[i * 8 + static_cast<std::size_t>(b)] = static_cast<unsigned char>((bits >> (8 * b)) & 0xff);
  }
  f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

void read_f64(std::ifstream& f, double* data, std::size_t count, const std::string& path) {
  std::vector<unsigned char> buf(count * 8);
  f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  require(static_cast<std::size_t>(f.gcount()) == buf.size(), ErrorCode::data,
          "truncated binary payload in " + path);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(buf[i * 8 + static_cast<std::size_t>(b)]) << (8 * b);
    std::memcpy(&data[i], &bits, 8);
  }
}

}  // namespace

Matrix read_matrix_csv(const std::string& path) {
  std::ifstream f = open_in(path, false);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) row.push_back(parse_double(tok, path));
    require(rows.empty() || row.size() == rows.front().size(), ErrorCode::data,
            "ragged CSV rows in " + path);
    rows.push_back(std::move(row));
  }
  require(!rows.empty(), ErrorCode::data, "empty CSV " + path);
  Matrix M(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.front().size(); ++j) M(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return M;
}

void write_matrix_csv(const std::string& path, const Matrix& M) {
  std::ofstream f = open_out(path, false);
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      if (j) f << ',';
      f << fmt_double(M(i, j));
    }
    f << '\n';
  }
  require(f.good(), ErrorCode::data, "write failed for " + path);
}

Matrix read_matrix_bin(const std::string& path) {
  std::ifstream f = open_in(path, true);
  std::int64_t m = read_i64(f, path);
  std::int64_t n = read_i64(f, path);
  require(m >= 1 && n >= 1 && m < (1 << 30) && n < (std::int64_t{1} << 40), ErrorCode::data,
          "implausible binary matrix header in " + path);
  Matrix M(m, n);  // Eigen default storage is column-major, matching the format
  read_f64(f, M.data(), static_cast<std::size_t>(m * n), path);
  return M;
}

void write_matrix_bin(const std::string& path, const Matrix& M) {
  std::ofstream f = open_out(path, true);
  write_i64(f, M.rows());
  write_i64(f, M.cols());
  write_f64(f, M.data(), static_cast<std::size_t>(M.size()));
  require(f.good(), ErrorCode::data, "write failed for " + path);
}

Matrix load_matrix(const std::string& path) {
  return has_suffix(path, ".bin") ? read_matrix_bin(path) : read_matrix_csv(path);
}

void save_matrix(const std::string& path, const Matrix& M) {
  if (has_suffix(path, ".bin"))
    write_matrix_bin(path, M);
  else
    write_matrix_csv(path, M);
}

SymTensor3 read_tensor(const std::string& path) {
  if (has_suffix(path, ".bin")) {
    std::ifstream f = open_in(path, true);
    std::int64_t d = read_i64(f, path);
    require(d >= 1 && d <= 4096, ErrorCode::data, "implausible tensor dimension in " + path);
    Tensor3 raw(d, d, d);
    read_f64(f, raw.data(), static_cast<std::size_t>(d * d * d), path);
    return SymTensor3::symmetrized(raw);
  }
  std::ifstream f = open_in(path, false);
  std::int64_t d = 0;
  f >> d;
  require(f.good() && d >= 1 && d <= 4096, ErrorCode::data, "bad tensor dimension in " + path);
  Tensor3 raw(d, d, d);
  for (std::int64_t i = 0; i < d * d * d; ++i) {
    f >> raw.data()[i];
    require(!f.fail(), ErrorCode::data, "truncated tensor file " + path);
  }
  return SymTensor3::symmetrized(raw);
}

void write_tensor(const std::string& path, const SymTensor3& t) {
  const Index d = t.dim();
  if (has_suffix(path, ".bin")) {
    std::ofstream f = open_out(path, true);
    write_i64(f, d);
    write_f64(f, t.raw().data(), t.raw().size());
    require(f.good(), ErrorCode::data, "write failed for " + path);
    return;
  }
  std::ofstream f = open_out(path, false);
  f << d << '\n';
  for (std::size_t i = 0; i < t.raw().size(); ++i) {
    f << fmt_double(t.raw()[i]);
    f << ((i + 1) % static_cast<std::size_t>(d) == 0 ? '\n' : ' ');
  }
  require(f.good(), ErrorCode::data, "write failed for " + path);
}

std::map<std::string, std::string> parse_kv_file(const std::string& path) {
  std::ifstream f = open_in(path, false);
  std::map<std::string, std::string> cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::size_t a = line.find_first_not_of(" \t");
    if (a == std::string::npos) continue;
    std::size_t b = line.find_last_not_of(" \t");
    line = line.substr(a, b - a + 1);
    std::size_t eq = line.find('=');
    require(eq != std::string::npos, ErrorCode::usage,
            path + ":" + std::to_string(lineno) + ": expected key=value");
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    auto strip = [](std::string& s) {
      std::size_t x = s.find_first_not_of(" \t");
      std::size_t y = s.find_last_not_of(" \t");
      s = x == std::string::npos ? std::string() : s.substr(x, y - x + 1);
    };
    strip(key);
    strip(val);
    require(!key.empty(), ErrorCode::usage, path + ":" + std::to_string(lineno) + ": empty key");
    cfg[key] = val;
  }
  return cfg;
}

void apply_override(std::map<std::string, std::string>& cfg, const std::string& key_eq_value) {
  std::size_t eq = key_eq_value.find('=');
  require(eq != std::string::npos && eq > 0, ErrorCode::usage,
          "override must be key=value: " + key_eq_value);
  cfg[key_eq_value.substr(0, eq)] = key_eq_value.substr(eq + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep)) out.push_back(tok);
  return out;
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  for (const std::string& tok : split(csv, ',')) {
    if (tok.empty()) continue;
    out.push_back(parse_double(tok, "<list>"));
  }
  return out;
}

std::vector<std::int64_t> parse_int_list(const std::string& csv) {
  std::vector<std::int64_t> out;
  for (const std::string& tok : split(csv, ',')) {
    if (tok.empty()) continue;
    std::int64_t v = 0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    require(res.ec == std::errc() && res.ptr == tok.data() + tok.size(), ErrorCode::usage,
            "bad integer '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  static const char* hexd = "0123456789abcdef";
  for (int i = 0; i < 16; ++i) buf[15 - i] = hexd[(h >> (4 * i)) & 0xf];
  buf[16] = '\0';
  return std::string(buf);
}

}  // namespace blvm
