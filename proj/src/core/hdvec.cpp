#include "core/hdvec.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "core/common.hpp"

namespace hdmann {

const char* to_string(VecMode mode) {
  switch (mode) {
    case VecMode::kReal: return "real";
    case VecMode::kBipolar: return "bipolar";
    case VecMode::kBinary: return "binary";
  }
  return "?";
}

VecMode vec_mode_from_string(const std::string& s) {
  if (s == "real") return VecMode::kReal;
  if (s == "bipolar") return VecMode::kBipolar;
  if (s == "binary") return VecMode::kBinary;
  throw ValidationError("unknown vector mode: " + s);
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("cosine_similarity: length mismatch");
  if (a.empty()) throw DomainError("cosine_similarity: empty input");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw DomainError("cosine_similarity: zero-norm input");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

BipolarVec clip_to_bipolar(std::span<const double> v) {
  if (v.empty()) throw DomainError("clip_to_bipolar: empty input");
  BipolarVec out;
  out.c.resize(v.size());
  for (size_t i = 0; i < v.size(); ++i) out.c[i] = v[i] < 0.0 ? -1 : 1;
  return out;
}

BinaryVec clip_to_binary(std::span<const double> v) {
  if (v.empty()) throw DomainError("clip_to_binary: empty input");
  BinaryVec out;
  out.c.resize(v.size());
  for (size_t i = 0; i < v.size(); ++i) out.c[i] = v[i] > 0.0 ? 1 : 0;
  return out;
}

BinaryVec bipolar_to_binary(const BipolarVec& v) {
  BinaryVec out;
  out.c.resize(v.c.size());
  for (size_t i = 0; i < v.c.size(); ++i) out.c[i] = static_cast<uint8_t>((v.c[i] + 1) / 2);
  return out;
}

BipolarVec binary_to_bipolar(const BinaryVec& v) {
  BipolarVec out;
  out.c.resize(v.c.size());
  for (size_t i = 0; i < v.c.size(); ++i) out.c[i] = static_cast<int8_t>(2 * v.c[i] - 1);
  return out;
}

double dot_similarity_bipolar(const BipolarVec& a, const BipolarVec& b) {
  if (a.c.size() != b.c.size()) throw ValidationError("dot_similarity_bipolar: length mismatch");
  if (a.c.empty()) throw DomainError("dot_similarity_bipolar: empty input");
  long dot = 0;
  for (size_t i = 0; i < a.c.size(); ++i) dot += a.c[i] * b.c[i];
  return scaled_dot_bipolar(static_cast<double>(dot), a.dim());
}

double dot_similarity_binary(const BinaryVec& a, const BinaryVec& b) {
  if (a.c.size() != b.c.size()) throw ValidationError("dot_similarity_binary: length mismatch");
  if (a.c.empty()) throw DomainError("dot_similarity_binary: empty input");
  long dot = 0;
  for (size_t i = 0; i < a.c.size(); ++i) dot += a.c[i] & b.c[i];
  return scaled_dot_binary(static_cast<double>(dot), a.dim());
}

double occupancy_ratio(const BinaryVec& v) {
  if (v.c.empty()) throw DomainError("occupancy_ratio: empty input");
  long ones = 0;
  for (uint8_t x : v.c) ones += x;
  return static_cast<double>(ones) / static_cast<double>(v.dim());
}

BipolarVec random_bipolar(int d, Rng& rng) {
  if (d < 1) throw ValidationError("random_bipolar: d must be >= 1");
  BipolarVec out;
  out.c.resize(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) out.c[static_cast<size_t>(i)] = (rng.next_u64() & 1) ? 1 : -1;
  return out;
}

RealVec to_real(const BipolarVec& v) {
  return RealVec(v.c.begin(), v.c.end());
}

RealVec to_real(const BinaryVec& v) {
  return RealVec(v.c.begin(), v.c.end());
}

std::string format_double(double x) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, p);
}

std::string vec_to_csv_row(std::span<const double> v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v[i]);
  }
  return out;
}

std::string vec_to_csv_row(const BipolarVec& v) {
  std::string out;
  for (size_t i = 0; i < v.c.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(static_cast<int>(v.c[i]));
  }
  return out;
}

std::string vec_to_csv_row(const BinaryVec& v) {
  std::string out;
  for (size_t i = 0; i < v.c.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(static_cast<int>(v.c[i]));
  }
  return out;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  cells.push_back(cur);
  return cells;
}

double parse_double(const std::string& s) {
  double x = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ValidationError("bad numeric cell: '" + s + "'");
  return x;
}

constexpr uint32_t kVecMagic = 0x31564448;  // "HDV1"

void write_u32(std::ostream& os, uint32_t x) {
  unsigned char b[4] = {static_cast<unsigned char>(x), static_cast<unsigned char>(x >> 8),
                        static_cast<unsigned char>(x >> 16), static_cast<unsigned char>(x >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw IoError("truncated vector dump");
  return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
         static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
}

void write_header(std::ostream& os, VecMode mode, uint32_t d) {
  write_u32(os, kVecMagic);
  os.put(static_cast<char>(mode));
  write_u32(os, d);
}

}  // namespace

RealVec real_from_csv_row(const std::string& line) {
  RealVec v;
  for (const auto& cell : split_csv(line)) v.push_back(parse_double(cell));
  return v;
}

BipolarVec bipolar_from_csv_row(const std::string& line) {
  BipolarVec v;
  for (const auto& cell : split_csv(line)) {
    double x = parse_double(cell);
    if (x != 1.0 && x != -1.0) throw ValidationError("bipolar cell must be +/-1");
    v.c.push_back(static_cast<int8_t>(x));
  }
  return v;
}

BinaryVec binary_from_csv_row(const std::string& line) {
  BinaryVec v;
  for (const auto& cell : split_csv(line)) {
    double x = parse_double(cell);
    if (x != 0.0 && x != 1.0) throw ValidationError("binary cell must be 0/1");
    v.c.push_back(static_cast<uint8_t>(x));
  }
  return v;
}

void save_vec(std::ostream& os, std::span<const double> v) {
  write_header(os, VecMode::kReal, static_cast<uint32_t>(v.size()));
  for (double x : v) {
    uint64_t bits;
    std::memcpy(&bits, &x, 8);
    write_u32(os, static_cast<uint32_t>(bits));
    write_u32(os, static_cast<uint32_t>(bits >> 32));
  }
}

void save_vec(std::ostream& os, const BipolarVec& v) {
  write_header(os, VecMode::kBipolar, static_cast<uint32_t>(v.c.size()));
  os.write(reinterpret_cast<const char*>(v.c.data()), static_cast<std::streamsize>(v.c.size()));
}

void save_vec(std::ostream& os, const BinaryVec& v) {
  write_header(os, VecMode::kBinary, static_cast<uint32_t>(v.c.size()));
  os.write(reinterpret_cast<const char*>(v.c.data()), static_cast<std::streamsize>(v.c.size()));
}

LoadedVec load_vec(std::istream& is) {
  if (read_u32(is) != kVecMagic) throw IoError("bad vector dump magic");
  int tag = is.get();
  uint32_t d = read_u32(is);
  LoadedVec out;
  out.mode = static_cast<VecMode>(tag);
  switch (out.mode) {
    case VecMode::kReal: {
      out.real.resize(d);
      for (uint32_t i = 0; i < d; ++i) {
        uint64_t bits = read_u32(is);
        bits |= static_cast<uint64_t>(read_u32(is)) << 32;
        std::memcpy(&out.real[i], &bits, 8);
      }
      break;
    }
    case VecMode::kBipolar: {
      out.bipolar.c.resize(d);
      is.read(reinterpret_cast<char*>(out.bipolar.c.data()), d);
      if (!is) throw IoError("truncated vector dump");
      break;
    }
    case VecMode::kBinary: {
      out.binary.c.resize(d);
      is.read(reinterpret_cast<char*>(out.binary.c.data()), d);
      if (!is) throw IoError("truncated vector dump");
      break;
    }
    default:
      throw IoError("bad vector representation tag");
  }
  return out;
}

}  // namespace hdmann
