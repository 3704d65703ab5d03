#include "ccinv/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "ccinv/errors.hpp"

namespace ccinv {

namespace {

enum class Field { real, integer, pattern, complex };
enum class Symmetry { general, symmetric, skew, hermitian };

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

template <Scalar T>
AnyMatrix assemble(index_t n, std::vector<Triplet<T>> entries, Symmetry sym) {
  const std::size_t stored = entries.size();
  for (std::size_t k = 0; k < stored; ++k) {
    const auto e = entries[k];
    if (e.row == e.col) {
      continue;
    }
    switch (sym) {
      case Symmetry::general:
        break;
      case Symmetry::symmetric:
        entries.push_back({e.col, e.row, e.value});
        break;
      case Symmetry::skew:
        entries.push_back({e.col, e.row, -e.value});
        break;
      case Symmetry::hermitian:
        entries.push_back({e.col, e.row, conj_value(e.value)});
        break;
    }
  }
  return SparseMatrix<T>::build(n, entries);
}

}  // namespace

AnyMatrix read_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw IoError("matrix market: empty input");
  }
  std::istringstream banner(line);
  std::string tag, object, format, field_s, sym_s;
  banner >> tag >> object >> format >> field_s >> sym_s;
  if (tag != "%%MatrixMarket" || lower(object) != "matrix") {
    throw IoError("matrix market: malformed header '" + line + "'");
  }
  if (lower(format) != "coordinate") {
    throw IoError("matrix market: only coordinate format is supported, got '" + format + "'");
  }

  Field field;
  const std::string f = lower(field_s);
  if (f == "real" || f == "double") {
    field = Field::real;
  } else if (f == "integer") {
    field = Field::integer;
  } else if (f == "pattern") {
    field = Field::pattern;
  } else if (f == "complex") {
    field = Field::complex;
  } else {
    throw IoError("matrix market: unsupported field '" + field_s + "'");
  }

  Symmetry sym;
  const std::string s = lower(sym_s);
  if (s == "general") {
    sym = Symmetry::general;
  } else if (s == "symmetric") {
    sym = Symmetry::symmetric;
  } else if (s == "skew-symmetric") {
    sym = Symmetry::skew;
  } else if (s == "hermitian") {
    sym = field == Field::complex ? Symmetry::hermitian : Symmetry::symmetric;
  } else {
    throw IoError("matrix market: unsupported symmetry '" + sym_s + "'");
  }

  do {
    if (!std::getline(in, line)) {
      throw IoError("matrix market: missing size line");
    }
  } while (line.empty() || line[0] == '%');

  long long rows = 0, cols = 0, count = 0;
  {
    std::istringstream size_line(line);
    if (!(size_line >> rows >> cols >> count) || rows < 1 || cols < 1 || count < 0) {
      throw IoError("matrix market: malformed size line '" + line + "'");
    }
  }
  if (rows != cols) {
    throw IoError("matrix market: matrix is not square (" + std::to_string(rows) + " x " +
                  std::to_string(cols) + ")");
  }
  const index_t n = rows;

  std::vector<Triplet<double>> real_entries;
  std::vector<Triplet<cdouble>> complex_entries;
  long long read = 0;
  while (read < count && std::getline(in, line)) {
    if (line.empty() || line[0] == '%') {
      continue;
    }
    std::istringstream ls(line);
    long long i = 0, j = 0;
    if (!(ls >> i >> j)) {
      throw IoError("matrix market: malformed entry '" + line + "'");
    }
    if (i < 1 || i > n || j < 1 || j > n) {
      throw IoError("matrix market: entry (" + std::to_string(i) + ", " + std::to_string(j) +
                    ") outside declared dimensions");
    }
    if (field == Field::complex) {
      double re = 0.0, im = 0.0;
      if (!(ls >> re >> im)) {
        throw IoError("matrix market: malformed complex entry '" + line + "'");
      }
      complex_entries.push_back({i - 1, j - 1, cdouble(re, im)});
    } else {
      double v = 1.0;
      if (field != Field::pattern && !(ls >> v)) {
        throw IoError("matrix market: malformed entry '" + line + "'");
      }
      real_entries.push_back({i - 1, j - 1, v});
    }
    ++read;
  }
  if (read != count) {
    throw IoError("matrix market: expected " + std::to_string(count) + " entries, found " +
                  std::to_string(read));
  }

  if (field == Field::complex) {
    return assemble<cdouble>(n, std::move(complex_entries), sym);
  }
  return assemble<double>(n, std::move(real_entries), sym);
}

AnyMatrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open '" + path.string() + "' for reading");
  }
  return read_matrix_market(in);
}

template <Scalar T>
void write_matrix_market(const SparseMatrix<T>& a, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate " << (is_complex_v<T> ? "complex" : "real")
      << " general\n";
  out << a.order() << ' ' << a.order() << ' ' << a.nnz() << '\n';
  out << std::setprecision(17);
  for (const auto& e : a.triplets()) {
    out << e.row + 1 << ' ' << e.col + 1 << ' ';
    if constexpr (is_complex_v<T>) {
      out << e.value.real() << ' ' << e.value.imag() << '\n';
    } else {
      out << e.value << '\n';
    }
  }
}

template <Scalar T>
void write_matrix_market(const SparseMatrix<T>& a, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  write_matrix_market(a, out);
  if (!out) {
    throw IoError("write to '" + path.string() + "' failed");
  }
}

void write_matrix_market(const AnyMatrix& a, const std::filesystem::path& path) {
  std::visit([&](const auto& m) { write_matrix_market(m, path); }, a);
}

template void write_matrix_market(const SparseMatrix<double>&, std::ostream&);
template void write_matrix_market(const SparseMatrix<cdouble>&, std::ostream&);
template void write_matrix_market(const SparseMatrix<double>&, const std::filesystem::path&);
template void write_matrix_market(const SparseMatrix<cdouble>&, const std::filesystem::path&);

}  // namespace ccinv
