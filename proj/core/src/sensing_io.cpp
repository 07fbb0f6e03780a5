#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>

#include "colprune/errors.hpp"
#include "colprune/sensing.hpp"

namespace colprune {

namespace {

constexpr std::array<char, 8> kMagic = {'C', 'P', 'S', 'E', 'N', 'S', 'E', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_integral_v<T>);
  std::array<unsigned char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFFu);
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

void put_f64(std::ostream& out, double value) { put_le(out, std::bit_cast<std::uint64_t>(value)); }

template <typename T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T));
  if (!in) throw Error("sensing container truncated");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return static_cast<T>(v);
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_le<std::uint64_t>(in)); }

}  // namespace

void write_sensing_binary(const SensingSet& sensing, std::ostream& out) {
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint32_t>(out, sensing.kind() == SensingKind::dense_gaussian ? 0u : 1u);
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(sensing.size()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(sensing.dim()));
  put_f64(out, sensing.noise_sigma());
  put_le<std::uint64_t>(out, sensing.seed());
  put_le<std::uint32_t>(out, sensing.measured() ? 1u : 0u);

  const Index n = sensing.size();
  const Index d = sensing.dim();
  if (sensing.kind() == SensingKind::dense_gaussian) {
    for (Index i = 0; i < n; ++i) {
      const Matrix A = sensing.matrix(i);
      for (Index r = 0; r < d; ++r) {
        for (Index c = r; c < d; ++c) put_f64(out, A(r, c));
      }
    }
  } else {
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < d; ++j) put_f64(out, sensing.vectors()(i, j));
    }
  }
  if (sensing.measured()) {
    for (Index i = 0; i < n; ++i) put_f64(out, sensing.observations()(i));
  }
  if (!out) throw Error("failed writing sensing container");
}

SensingSet read_sensing_binary(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw Error("not a sensing container (bad magic)");
  const auto version = get_le<std::uint32_t>(in);
  if (version != kVersion) throw Error("unsupported sensing container version " + std::to_string(version));
  const auto kind = get_le<std::uint32_t>(in);
  const auto n = static_cast<Index>(get_le<std::uint64_t>(in));
  const auto d = static_cast<Index>(get_le<std::uint64_t>(in));
  const double sigma = get_f64(in);
  const auto seed = get_le<std::uint64_t>(in);
  const bool measured = get_le<std::uint32_t>(in) != 0;
  if (n < 1 || d < 1) throw Error("sensing container has empty dimensions");

  SensingSet s;
  if (kind == 0) {
    std::vector<Matrix> mats;
    mats.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
      Matrix A(d, d);
      for (Index r = 0; r < d; ++r) {
        for (Index c = r; c < d; ++c) {
          A(r, c) = get_f64(in);
          A(c, r) = A(r, c);
        }
      }
      mats.push_back(std::move(A));
    }
    s = SensingSet::from_matrices(mats);
  } else if (kind == 1) {
    Matrix X(n, d);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < d; ++j) X(i, j) = get_f64(in);
    }
    s = SensingSet::from_vectors(std::move(X));
  } else {
    throw Error("unknown sensing kind tag " + std::to_string(kind));
  }
  if (measured) {
    Vector y(n);
    for (Index i = 0; i < n; ++i) y(i) = get_f64(in);
    s.set_observations(std::move(y), sigma);
  }
  s.set_seed(seed);
  return s;
}

void write_sensing_binary(const SensingSet& sensing, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_sensing_binary(sensing, out);
}

SensingSet read_sensing_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return read_sensing_binary(in);
}

void write_sensing_csv(const SensingSet& sensing, std::ostream& out) {
  const Index n = sensing.size();
  const Index d = sensing.dim();
  out << "i,y";
  if (sensing.kind() == SensingKind::dense_gaussian) {
    for (Index r = 0; r < d; ++r) {
      for (Index c = r; c < d; ++c) out << ",a_" << r << '_' << c;
    }
  } else {
    for (Index j = 0; j < d; ++j) out << ",x_" << j;
  }
  out << '\n' << std::setprecision(17);
  for (Index i = 0; i < n; ++i) {
    out << i << ',';
    if (sensing.measured()) out << sensing.observations()(i);
    if (sensing.kind() == SensingKind::dense_gaussian) {
      const Matrix A = sensing.matrix(i);
      for (Index r = 0; r < d; ++r) {
        for (Index c = r; c < d; ++c) out << ',' << A(r, c);
      }
    } else {
      for (Index j = 0; j < d; ++j) out << ',' << sensing.vectors()(i, j);
    }
    out << '\n';
  }
}

}  // namespace colprune
