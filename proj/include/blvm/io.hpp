#pragma once

#include "blvm/tensor.hpp"

#include <map>
#include <string>
#include <vector>

namespace blvm {

// shortest round-trip decimal representation of a double
std::string fmt_double(double x);

Matrix read_matrix_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Matrix& M);

// raw binary: two little-endian int64 (rows, cols) then rows*cols
// little-endian 64-bit floats, column-major
Matrix read_matrix_bin(const std::string& path);
void write_matrix_bin(const std::string& path, const Matrix& M);

// dispatch on extension: .bin -> binary, anything else -> CSV
Matrix load_matrix(const std::string& path);
void save_matrix(const std::string& path, const Matrix& M);

// text: d on the first line, then the d^3 row-major entries; .bin variant:
// little-endian int64 d followed by d^3 doubles row-major
SymTensor3 read_tensor(const std::string& path);
void write_tensor(const std::string& path, const SymTensor3& t);

// flat key=value configuration, '#' comments; later files/overrides win
std::map<std::string, std::string> parse_kv_file(const std::string& path);
void apply_override(std::map<std::string, std::string>& cfg, const std::string& key_eq_value);

std::vector<double> parse_double_list(const std::string& csv);
std::vector<std::int64_t> parse_int_list(const std::string& csv);
std::vector<std::string> split(const std::string& s, char sep);

// FNV-1a hash of a string, hex-encoded; used for CSV row provenance
std::string fnv1a_hex(const std::string& s);

}  // namespace blvm
