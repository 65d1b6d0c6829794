#include "iwri/io.hpp"

#include "iwri/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

namespace iwri {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ConfigError("write failed for " + path);
}

namespace {

// Line-oriented reader over an in-memory file that tracks byte offsets.
class HeaderCursor {
 public:
  explicit HeaderCursor(const std::string& bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }

  std::string line() {
    const std::size_t start = pos_;
    const std::size_t nl = bytes_.find('\n', pos_);
    if (nl == std::string::npos) throw FormatError("truncated header", start);
    pos_ = nl + 1;
    std::string s = bytes_.substr(start, nl - start);
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
  }

  template <typename T>
  T number(const std::string& what) {
    const std::size_t at = pos_;
    const std::string s = line();
    return parse<T>(s, what, at);
  }

  template <typename T>
  static T parse(const std::string& s, const std::string& what, std::size_t at) {
    T v{};
    const char* b = s.data();
    const char* e = s.data() + s.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    while (e > b && (e[-1] == ' ' || e[-1] == '\t')) --e;
    if (b == e) throw FormatError("empty " + what, at);
    if constexpr (std::is_floating_point_v<T>) {
      const std::string t(b, e);
      if (t == "inf") return std::numeric_limits<T>::infinity();
      if (t == "-inf") return -std::numeric_limits<T>::infinity();
    }
    const auto r = std::from_chars(b, e, v);
    if (r.ec != std::errc() || r.ptr != e) throw FormatError("malformed " + what + " '" + s + "'", at);
    return v;
  }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(const std::string& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return v;
}

std::uint64_t get_u64(const std::string& in, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return v;
}

void put_f64(std::string& out, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, sizeof v);
  put_u64(out, v);
}

double get_f64(const std::string& in, std::size_t at) {
  const std::uint64_t v = get_u64(in, at);
  double d;
  std::memcpy(&d, &v, sizeof d);
  return d;
}

}  // namespace

std::string encode_model(const VelocityModel& model) {
  const Grid2D& g = model.grid;
  if (model.values.size() != g.size()) throw ShapeError("model size does not match its grid");
  std::string out = std::string(kModelMagic) + "\n" + std::to_string(g.nx) + "\n" + std::to_string(g.nz) +
                    "\n" + format_double(g.dx) + "\n" + format_double(g.dz) + "\n";
  out.reserve(out.size() + 4 * static_cast<std::size_t>(g.size()));
  for (Index i = 0; i < g.size(); ++i) {
    const float f = static_cast<float>(model.values[i]);
    std::uint32_t v;
    std::memcpy(&v, &f, sizeof v);
    put_u32(out, v);
  }
  return out;
}

VelocityModel decode_model(const std::string& bytes) {
  HeaderCursor cur(bytes);
  if (cur.line() != kModelMagic) throw FormatError("not an IWRI model file", 0);
  const std::size_t nx_at = cur.offset();
  const auto nx = cur.number<long long>("nx");
  const auto nz = cur.number<long long>("nz");
  const auto dx = cur.number<double>("dx");
  const auto dz = cur.number<double>("dz");
  Grid2D grid;
  try {
    grid = Grid2D(nx, nz, dx, dz);
  } catch (const GeometryError& e) {
    throw FormatError(std::string("invalid grid header: ") + e.what(), nx_at);
  }
  const std::size_t payload = cur.offset();
  const std::size_t expected = 4 * static_cast<std::size_t>(grid.size());
  if (bytes.size() - payload != expected) {
    throw FormatError("payload holds " + std::to_string(bytes.size() - payload) + " bytes, expected " +
                          std::to_string(expected),
                      payload);
  }
  VelocityModel model{grid, Eigen::VectorXd(grid.size())};
  for (Index i = 0; i < grid.size(); ++i) {
    const std::size_t at = payload + 4 * static_cast<std::size_t>(i);
    const std::uint32_t v = get_u32(bytes, at);
    float f;
    std::memcpy(&f, &v, sizeof f);
    if (!std::isfinite(f)) throw FormatError("non-finite value at index " + std::to_string(i), at);
    model.values[i] = f;
  }
  return model;
}

void write_model_file(const VelocityModel& model, const std::string& path) {
  write_file(path, encode_model(model));
}

VelocityModel read_model_file(const std::string& path) { return decode_model(read_file(path)); }

std::string encode_dataset(const FrequencyDataset& data) {
  data.validate();
  std::string out = std::string(kDataMagic) + "\n";
  out += "frequencies " + std::to_string(data.frequencies.size()) + "\n";
  out += "sources " + std::to_string(data.n_sources) + "\n";
  out += "receivers " + std::to_string(data.n_receivers) + "\n";
  out += "seed " + (data.seed ? std::to_string(*data.seed) : std::string("none")) + "\n";
  out += "snr_db " + (data.snr_db ? format_double(*data.snr_db) : std::string("none")) + "\n";
  for (std::size_t f = 0; f < data.frequencies.size(); ++f) {
    out += "frequency " + format_double(data.frequencies[f]) + " noise " + format_double(data.noise_level[f]) + "\n";
  }
  out += "end\n";
  for (const auto& block : data.data) {
    for (const auto& d : block) {
      for (Index r = 0; r < d.size(); ++r) {
        put_f64(out, d[r].real());
        put_f64(out, d[r].imag());
      }
    }
  }
  return out;
}

namespace {

std::string expect_key(HeaderCursor& cur, const std::string& key) {
  const std::size_t at = cur.offset();
  const std::string s = cur.line();
  if (s.rfind(key + " ", 0) != 0) throw FormatError("expected '" + key + "'", at);
  return s.substr(key.size() + 1);
}

}  // namespace

FrequencyDataset decode_dataset(const std::string& bytes) {
  HeaderCursor cur(bytes);
  if (cur.line() != kDataMagic) throw FormatError("not an IWRI dataset file", 0);
  FrequencyDataset data;
  std::size_t at = cur.offset();
  const auto nf = HeaderCursor::parse<long long>(expect_key(cur, "frequencies"), "frequency count", at);
  at = cur.offset();
  data.n_sources = HeaderCursor::parse<long long>(expect_key(cur, "sources"), "source count", at);
  at = cur.offset();
  data.n_receivers = HeaderCursor::parse<long long>(expect_key(cur, "receivers"), "receiver count", at);
  if (nf <= 0 || data.n_sources <= 0 || data.n_receivers <= 0) throw FormatError("counts must be positive", at);
  at = cur.offset();
  if (const std::string s = expect_key(cur, "seed"); s != "none") {
    data.seed = HeaderCursor::parse<std::uint64_t>(s, "seed", at);
  }
  at = cur.offset();
  if (const std::string s = expect_key(cur, "snr_db"); s != "none") {
    data.snr_db = HeaderCursor::parse<double>(s, "snr_db", at);
  }
  for (long long f = 0; f < nf; ++f) {
    at = cur.offset();
    const std::string s = expect_key(cur, "frequency");
    const auto sp = s.find(" noise ");
    if (sp == std::string::npos) throw FormatError("expected 'noise' on frequency line", at);
    data.frequencies.push_back(HeaderCursor::parse<double>(s.substr(0, sp), "frequency", at));
    data.noise_level.push_back(HeaderCursor::parse<double>(s.substr(sp + 7), "noise level", at));
  }
  at = cur.offset();
  if (cur.line() != "end") throw FormatError("expected 'end'", at);
  const std::size_t payload = cur.offset();
  const std::size_t expected = 16 * static_cast<std::size_t>(nf * data.n_sources * data.n_receivers);
  if (bytes.size() - payload != expected) {
    throw FormatError("payload holds " + std::to_string(bytes.size() - payload) + " bytes, expected " +
                          std::to_string(expected),
                      payload);
  }
  std::size_t pos = payload;
  data.data.assign(static_cast<std::size_t>(nf), std::vector<CVector>(static_cast<std::size_t>(data.n_sources)));
  for (auto& block : data.data) {
    for (auto& d : block) {
      d.resize(data.n_receivers);
      for (Index r = 0; r < data.n_receivers; ++r, pos += 16) {
        const double re = get_f64(bytes, pos), im = get_f64(bytes, pos + 8);
        if (!std::isfinite(re) || !std::isfinite(im)) throw FormatError("non-finite sample", pos);
        d[r] = Complex(re, im);
      }
    }
  }
  try {
    data.validate();
  } catch (const ShapeError& e) {
    throw FormatError(e.what(), 0);
  }
  return data;
}

void write_dataset_file(const FrequencyDataset& data, const std::string& path) {
  write_file(path, encode_dataset(data));
}

FrequencyDataset read_dataset_file(const std::string& path) { return decode_dataset(read_file(path)); }

void write_convergence_csv(const ConvergenceRecord& record, std::ostream& os) {
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  os << kConvergenceHeader << '\n';
  for (const auto& r : record.rows) {
    os << r.k << ',' << format_double(r.data_misfit) << ',' << format_double(r.pde_misfit) << ','
       << opt(r.model_error) << ',' << opt(r.wavefield_error) << ',' << r.pde_solves << ','
       << opt(r.wall_seconds) << '\n';
  }
}

void write_convergence_csv(const ConvergenceRecord& record, const std::string& path) {
  std::ostringstream os;
  write_convergence_csv(record, os);
  write_file(path, os.str());
}

ConvergenceRecord parse_convergence_csv(std::istream& is) {
  ConvergenceRecord rec;
  std::string line;
  if (!std::getline(is, line) || line != kConvergenceHeader) throw FormatError("bad CSV header", 0);
  std::size_t offset = line.size() + 1;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != 7) throw FormatError("CSV row needs 7 fields", offset);
    auto opt = [&](const std::string& s) -> std::optional<double> {
      if (s.empty()) return std::nullopt;
      return HeaderCursor::parse<double>(s, "CSV field", offset);
    };
    ConvergenceRecord::Row r;
    r.k = HeaderCursor::parse<int>(cells[0], "k", offset);
    r.data_misfit = HeaderCursor::parse<double>(cells[1], "data_misfit", offset);
    r.pde_misfit = HeaderCursor::parse<double>(cells[2], "pde_misfit", offset);
    r.model_error = opt(cells[3]);
    r.wavefield_error = opt(cells[4]);
    r.pde_solves = HeaderCursor::parse<long>(cells[5], "pde_solves", offset);
    r.wall_seconds = opt(cells[6]);
    rec.rows.push_back(r);
    offset += line.size() + 1;
  }
  return rec;
}

ConvergenceRecord read_convergence_csv(const std::string& path) {
  std::istringstream is(read_file(path));
  return parse_convergence_csv(is);
}

std::string encode_raster(const Eigen::VectorXd& field, Index nx, Index nz, RasterScaling scaling) {
  if (field.size() != nx * nz) throw ShapeError("raster size does not match nx*nz");
  if (!field.allFinite()) throw ParameterError("raster field must be finite");
  double lo = scaling.lo, hi = scaling.hi;
  if (scaling.minmax) {
    lo = field.minCoeff();
    hi = field.maxCoeff();
  }
  std::string out = "P5\n" + std::to_string(nx) + " " + std::to_string(nz) + "\n255\n";
  for (Index i = 0; i < field.size(); ++i) {
    int px = 128;
    if (hi != lo) {
      const double v = std::round(255.0 * (field[i] - lo) / (hi - lo));
      px = static_cast<int>(std::clamp(v, 0.0, 255.0));
    }
    out.push_back(static_cast<char>(static_cast<unsigned char>(px)));
  }
  return out;
}

void write_raster(const Eigen::VectorXd& field, Index nx, Index nz, const std::string& path,
                  RasterScaling scaling) {
  write_file(path, encode_raster(field, nx, nz, scaling));
}

void write_metadata(const std::vector<std::pair<std::string, std::string>>& entries,
                    const std::string& path) {
  std::string out;
  for (const auto& [k, v] : entries) out += k + " = " + v + "\n";
  write_file(path, out);
}

}  // namespace iwri
