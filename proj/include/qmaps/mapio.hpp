#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "qmaps/errors.hpp"
#include "qmaps/maps.hpp"
#include "qmaps/random.hpp"

// Map documents on disk (.qmap.json): a single JSON object
//   { "kind": "superop" | "choi" | "osr",
//     "dim": d,
//     "payload": matrix | [ {"sign": +-1, "op": matrix}, ... ],
//     "meta": {"name": ..., "description": ...} }        (optional)
// where a matrix is {"rows": r, "cols": c, "data": [[re, im], ...]} with the
// entries row-major. Serialized doubles round-trip exactly.

namespace qmaps {

struct MapDocument {
  std::string kind;  // "superop", "choi" or "osr"
  std::size_t dim = 0;
  ComplexMatrix matrix;           // payload for superop / choi
  std::vector<SignedTerm> terms;  // payload for osr
  std::string name;               // meta; empty means absent
  std::string description;

  friend bool operator==(const MapDocument& a, const MapDocument& b) {
    return a.kind == b.kind && a.dim == b.dim && a.matrix == b.matrix && a.terms == b.terms &&
           a.name == b.name && a.description == b.description;
  }
};

inline nlohmann::json matrix_to_json(const ComplexMatrix& m) {
  nlohmann::json data = nlohmann::json::array();
  for (const auto& z : m.entries()) data.push_back({z.real(), z.imag()});
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

inline ComplexMatrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data"))
    throw ParseError("matrix object needs rows, cols and data");
  if (!j["rows"].is_number_integer() || !j["cols"].is_number_integer() ||
      j["rows"].get<long long>() < 0 || j["cols"].get<long long>() < 0)
    throw ParseError("matrix rows/cols must be non-negative integers");
  const std::size_t rows = j["rows"].get<std::size_t>();
  const std::size_t cols = j["cols"].get<std::size_t>();
  if (!j["data"].is_array()) throw ParseError("matrix data must be an array");
  const auto& data = j["data"];
  if (data.size() != rows * cols)
    throw ShapeError("matrix data holds " + std::to_string(data.size()) + " entries, expected " +
                     std::to_string(rows * cols));
  std::vector<Complex> entries;
  entries.reserve(data.size());
  for (const auto& e : data) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
      throw ParseError("complex entry must be a [re, im] pair");
    entries.emplace_back(e[0].get<double>(), e[1].get<double>());
  }
  return ComplexMatrix(rows, cols, std::move(entries));
}

inline nlohmann::json to_json(const MapDocument& doc) {
  nlohmann::json j;
  j["kind"] = doc.kind;
  j["dim"] = doc.dim;
  if (doc.kind == "osr") {
    nlohmann::json payload = nlohmann::json::array();
    for (const auto& t : doc.terms)
      payload.push_back({{"sign", t.sign}, {"op", matrix_to_json(t.op)}});
    j["payload"] = std::move(payload);
  } else {
    j["payload"] = matrix_to_json(doc.matrix);
  }
  if (!doc.name.empty() || !doc.description.empty()) {
    nlohmann::json meta = nlohmann::json::object();
    if (!doc.name.empty()) meta["name"] = doc.name;
    if (!doc.description.empty()) meta["description"] = doc.description;
    j["meta"] = std::move(meta);
  }
  return j;
}

inline MapDocument document_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("map document must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key != "kind" && key != "dim" && key != "payload" && key != "meta")
      throw ParseError("unknown top-level key '" + key + "'");
  }
  if (!j.contains("kind") || !j["kind"].is_string())
    throw ParseError("map document needs a string 'kind'");
  MapDocument doc;
  doc.kind = j["kind"].get<std::string>();
  if (doc.kind != "superop" && doc.kind != "choi" && doc.kind != "osr")
    throw ParseError("unknown kind '" + doc.kind + "'");
  if (!j.contains("dim") || !j["dim"].is_number_integer() || j["dim"].get<long long>() <= 0)
    throw ParseError("map document needs a positive integer 'dim'");
  doc.dim = j["dim"].get<std::size_t>();
  if (!j.contains("payload")) throw ParseError("map document needs a 'payload'");

  if (doc.kind == "osr") {
    if (!j["payload"].is_array()) throw ParseError("osr payload must be an array of terms");
    for (const auto& t : j["payload"]) {
      if (!t.is_object() || !t.contains("sign") || !t.contains("op"))
        throw ParseError("osr term needs 'sign' and 'op'");
      if (!t["sign"].is_number_integer()) throw ParseError("term sign must be an integer");
      const int sign = t["sign"].get<int>();
      if (sign != 1 && sign != -1) throw ParseError("term sign must be +1 or -1");
      ComplexMatrix op = matrix_from_json(t["op"]);
      if (op.rows() != doc.dim || op.cols() != doc.dim)
        throw ShapeError("osr operator is not " + std::to_string(doc.dim) + "x" +
                         std::to_string(doc.dim));
      doc.terms.push_back(SignedTerm{sign, std::move(op)});
    }
  } else {
    doc.matrix = matrix_from_json(j["payload"]);
    const std::size_t dd = doc.dim * doc.dim;
    if (doc.matrix.rows() != dd || doc.matrix.cols() != dd)
      throw ShapeError(doc.kind + " payload is not " + std::to_string(dd) + "x" +
                       std::to_string(dd));
  }

  if (j.contains("meta")) {
    if (!j["meta"].is_object()) throw ParseError("meta must be an object");
    const auto& meta = j["meta"];
    if (meta.contains("name") && meta["name"].is_string())
      doc.name = meta["name"].get<std::string>();
    if (meta.contains("description") && meta["description"].is_string())
      doc.description = meta["description"].get<std::string>();
  }
  return doc;
}

inline void save_map(const MapDocument& doc, std::ostream& out) {
  out << to_json(doc).dump(2) << "\n";
}

inline void save_map(const MapDocument& doc, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ParseError("cannot open '" + path + "' for writing");
  save_map(doc, f);
}

inline MapDocument load_map(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  return document_from_json(j);
}

inline MapDocument load_map(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open '" + path + "'");
  return load_map(f);
}

inline MapDocument make_document(const SignedOSR& osr, std::string name = "",
                                 std::string description = "") {
  MapDocument doc;
  doc.kind = "osr";
  doc.dim = osr.dim();
  doc.terms = osr.terms();
  doc.name = std::move(name);
  doc.description = std::move(description);
  return doc;
}

inline MapDocument make_document(const Superoperator& sup, std::string name = "",
                                 std::string description = "") {
  MapDocument doc;
  doc.kind = "superop";
  doc.dim = sup.dim();
  doc.matrix = sup.matrix();
  doc.name = std::move(name);
  doc.description = std::move(description);
  return doc;
}

inline MapDocument make_document(const ChoiMatrix& choi, std::string name = "",
                                 std::string description = "") {
  MapDocument doc;
  doc.kind = "choi";
  doc.dim = choi.dim();
  doc.matrix = choi.matrix();
  doc.name = std::move(name);
  doc.description = std::move(description);
  return doc;
}

// Typed views of a document. Validation beyond shape happens here, not at
// load time; a stored "choi" payload is only checked for Hermiticity when a
// ChoiMatrix is actually requested.
inline SignedOSR to_signed_osr(const MapDocument& doc) {
  if (doc.kind != "osr") throw ShapeError("document kind '" + doc.kind + "' is not osr");
  return SignedOSR(doc.dim, doc.terms);
}

inline Superoperator to_superoperator(const MapDocument& doc) {
  if (doc.kind != "superop")
    throw ShapeError("document kind '" + doc.kind + "' is not superop");
  return Superoperator(doc.dim, doc.matrix);
}

inline ChoiMatrix to_choi(const MapDocument& doc) {
  if (doc.kind != "choi") throw ShapeError("document kind '" + doc.kind + "' is not choi");
  return ChoiMatrix(doc.dim, doc.matrix);
}

/// Parameters for gen_fixture. A fixture reads only the fields it needs and
/// rejects missing or out-of-range ones with ParamOutOfRange.
struct FixtureParams {
  int dim = 2;
  std::optional<double> p;      // depolarizing strength, or random_hp +1 count
  std::optional<int> q;         // random_hp -1 count
  std::optional<double> gamma;  // amplitude damping strength
  std::uint64_t seed = 0;
};

namespace detail {

inline ComplexMatrix basis_matrix(std::size_t d, std::size_t i, std::size_t j) {
  ComplexMatrix e(d, d);
  e(i, j) = 1.0;
  return e;
}

inline SignedOSR transpose_osr(std::size_t d) {
  // Eigenbasis of the swap operator: symmetric combinations carry +1,
  // antisymmetric ones -1.
  std::vector<SignedTerm> terms;
  const double r = 1.0 / std::sqrt(2.0);
  for (std::size_t i = 0; i < d; ++i) terms.push_back(SignedTerm{1, basis_matrix(d, i, i)});
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j)
      terms.push_back(
          SignedTerm{1, Complex(r) * (basis_matrix(d, i, j) + basis_matrix(d, j, i))});
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j)
      terms.push_back(
          SignedTerm{-1, Complex(r) * (basis_matrix(d, i, j) - basis_matrix(d, j, i))});
  return SignedOSR(d, std::move(terms));
}

inline SignedOSR depolarizing_osr(double p) {
  // (1-p) rho + p tr(rho) I/2 expanded over the Pauli conjugations:
  // coefficient 1 - 3p/4 on the identity and p/4 on each of X, Y, Z.
  const ComplexMatrix id = ComplexMatrix::identity(2);
  const ComplexMatrix sx = ComplexMatrix::from_rows({{0.0, 1.0}, {1.0, 0.0}});
  const ComplexMatrix sy = ComplexMatrix::from_rows({{0.0, Complex(0.0, -1.0)},
                                                     {Complex(0.0, 1.0), 0.0}});
  const ComplexMatrix sz = ComplexMatrix::from_rows({{1.0, 0.0}, {0.0, -1.0}});
  const double c0 = 1.0 - 0.75 * p;
  const double c1 = 0.25 * p;
  std::vector<std::pair<double, const ComplexMatrix*>> coeffs = {
      {c0, &id}, {c1, &sx}, {c1, &sy}, {c1, &sz}};
  std::vector<SignedTerm> terms;
  for (const auto& [c, op] : coeffs)
    if (c > 0.0) terms.push_back(SignedTerm{1, Complex(std::sqrt(c)) * (*op)});
  for (const auto& [c, op] : coeffs)
    if (c < 0.0) terms.push_back(SignedTerm{-1, Complex(std::sqrt(-c)) * (*op)});
  return SignedOSR(2, std::move(terms));
}

inline SignedOSR random_hp_osr(std::size_t d, int p, int q, std::uint64_t seed) {
  const std::size_t dd = d * d;
  std::mt19937_64 rng(seed);
  std::vector<std::vector<Complex>> basis;
  while (basis.size() < static_cast<std::size_t>(p + q)) {
    std::vector<Complex> x(dd);
    for (auto& z : x) z = uniform_complex(rng, 1.0);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) {
        Complex dot = 0.0;
        for (std::size_t a = 0; a < dd; ++a) dot += std::conj(b[a]) * x[a];
        for (std::size_t a = 0; a < dd; ++a) x[a] -= dot * b[a];
      }
    double nsq = 0.0;
    for (const auto& z : x) nsq += std::norm(z);
    if (nsq < 1e-12) continue;  // essentially dependent draw, try again
    const double inv = 1.0 / std::sqrt(nsq);
    for (auto& z : x) z *= inv;
    basis.push_back(std::move(x));
  }
  ComplexMatrix b(dd, dd);
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const double sgn = k < static_cast<std::size_t>(p) ? 1.0 : -1.0;
    for (std::size_t r = 0; r < dd; ++r)
      for (std::size_t c = 0; c < dd; ++c)
        b(r, c) += sgn * basis[k][r] * std::conj(basis[k][c]);
  }
  return osr_from_choi(ChoiMatrix(d, std::move(b)));
}

}  // namespace detail

/// Named example maps. Available fixtures: identity, transpose,
/// completely_depolarizing (all take dim), depolarizing (p, dim 2),
/// amplitude_damping (gamma, dim 2) and random_hp (p, q, seed, dim).
inline MapDocument gen_fixture(const std::string& name, const FixtureParams& params = {}) {
  if (params.dim < 1) throw ParamOutOfRange("fixture dimension must be positive");
  const std::size_t d = static_cast<std::size_t>(params.dim);

  if (name == "identity") {
    return make_document(SignedOSR(d, {SignedTerm{1, ComplexMatrix::identity(d)}}), "identity",
                         "identity map");
  }
  if (name == "transpose") {
    return make_document(detail::transpose_osr(d), "transpose", "matrix transpose");
  }
  if (name == "completely_depolarizing") {
    std::vector<SignedTerm> terms;
    const Complex r = 1.0 / std::sqrt(static_cast<double>(d));
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        terms.push_back(SignedTerm{1, r * detail::basis_matrix(d, i, j)});
    return make_document(SignedOSR(d, std::move(terms)), "completely_depolarizing",
                         "rho -> tr(rho) I/" + std::to_string(d));
  }
  if (name == "depolarizing") {
    if (params.dim != 2) throw ParamOutOfRange("depolarizing fixture is specific to dim 2");
    if (!params.p) throw ParamOutOfRange("depolarizing fixture needs parameter p");
    return make_document(detail::depolarizing_osr(*params.p), "depolarizing",
                         "depolarizing map, p=" + std::to_string(*params.p));
  }
  if (name == "amplitude_damping") {
    if (params.dim != 2)
      throw ParamOutOfRange("amplitude_damping fixture is specific to dim 2");
    if (!params.gamma) throw ParamOutOfRange("amplitude_damping fixture needs parameter gamma");
    const double g = *params.gamma;
    if (g < 0.0 || g > 1.0) throw ParamOutOfRange("amplitude_damping needs 0 <= gamma <= 1");
    ComplexMatrix k0 = ComplexMatrix::from_rows({{1.0, 0.0}, {0.0, std::sqrt(1.0 - g)}});
    ComplexMatrix k1 = ComplexMatrix::from_rows({{0.0, std::sqrt(g)}, {0.0, 0.0}});
    return make_document(
        SignedOSR(2, {SignedTerm{1, std::move(k0)}, SignedTerm{1, std::move(k1)}}),
        "amplitude_damping", "amplitude damping, gamma=" + std::to_string(g));
  }
  if (name == "random_hp") {
    if (!params.p || !params.q) throw ParamOutOfRange("random_hp fixture needs p and q");
    const double praw = *params.p;
    if (praw < 0.0 || praw != std::floor(praw))
      throw ParamOutOfRange("random_hp p must be a non-negative integer");
    const int p = static_cast<int>(praw);
    const int q = *params.q;
    if (q < 0) throw ParamOutOfRange("random_hp q must be non-negative");
    if (static_cast<std::size_t>(p + q) > d * d)
      throw ParamOutOfRange("random_hp needs p + q <= dim^2");
    return make_document(detail::random_hp_osr(d, p, q, params.seed), "random_hp",
                         "random hermiticity-preserving map, p=" + std::to_string(p) +
                             ", q=" + std::to_string(q) + ", seed=" + std::to_string(params.seed));
  }
  throw UnknownFixture("no fixture named '" + name + "'");
}

}  // namespace qmaps
