#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "qmaps/equivalence.hpp"
#include "qmaps/errors.hpp"
#include "qmaps/mapio.hpp"
#include "qmaps/maps.hpp"

// Command line front end. run() is the whole program; the binary's main() is
// a two-line wrapper so tests can drive commands in-process with their own
// streams.
//
// Exit codes: 0 success (and "equivalent" verdicts), 1 not equivalent
// (equiv only), 2 usage error, 3 unreadable or invalid input, 4 numerical
// failure.

namespace qmaps::cli {

namespace exit_code {
constexpr int ok = 0;
constexpr int not_equivalent = 1;
constexpr int usage = 2;
constexpr int bad_input = 3;
constexpr int numerical = 4;
}  // namespace exit_code

namespace detail {

inline std::string fmt6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

inline std::string fmt_complex(const Complex& z) {
  if (z.imag() == 0.0) return fmt6(z.real());
  return fmt6(z.real()) + (z.imag() < 0.0 ? "-" : "+") + fmt6(std::abs(z.imag())) + "i";
}

inline MapDocument read_document(const std::string& path, std::istream& in) {
  if (path == "-") return load_map(in);
  return load_map(path);
}

inline nlohmann::json read_json(const std::string& path, std::istream& in) {
  try {
    if (path == "-") return nlohmann::json::parse(in);
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open '" + path + "'");
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
}

inline void emit_json(const nlohmann::json& j, const std::string& out_path, std::ostream& out) {
  if (out_path.empty() || out_path == "-") {
    out << j.dump(2) << "\n";
    return;
  }
  std::ofstream f(out_path);
  if (!f) throw ParseError("cannot open '" + out_path + "' for writing");
  f << j.dump(2) << "\n";
}

inline void write_document(const MapDocument& doc, const std::string& out_path,
                           std::ostream& out) {
  emit_json(to_json(doc), out_path, out);
}

// The dynamical-matrix candidate of any document kind, without the
// Hermiticity gate; analyze wants to report on non-Hermitian inputs rather
// than reject them.
inline ComplexMatrix raw_choi_of(const MapDocument& doc) {
  if (doc.kind == "osr") return choi_from_osr(to_signed_osr(doc)).matrix();
  if (doc.kind == "choi") return doc.matrix;
  return reshuffle(doc.matrix);
}

// Operator-sum view of any document kind; non-osr kinds go through the
// validated dynamical matrix, so a non-Hermitian payload is rejected here.
inline SignedOSR osr_of(const MapDocument& doc) {
  if (doc.kind == "osr") return to_signed_osr(doc);
  return osr_from_choi(ChoiMatrix(doc.dim, raw_choi_of(doc)));
}

inline void print_matrix_text(const ComplexMatrix& m, std::ostream& out) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out << (j == 0 ? "" : "  ") << fmt_complex(m(i, j));
    out << "\n";
  }
}

inline int run_analyze(const MapDocument& doc, double tol, const std::string& format,
                       std::ostream& out, std::ostream& err) {
  const MapReport report = analyze_map(doc.dim, raw_choi_of(doc), tol);
  if (!report.hermiticity_preserving)
    err << "warning: map is not hermiticity-preserving; spectral fields describe its "
           "Hermitian part\n";
  if (format == "json") {
    nlohmann::json j = {{"dim", report.dim},
                        {"hermiticity_preserving", report.hermiticity_preserving},
                        {"completely_positive", report.completely_positive},
                        {"trace_preserving", report.trace_preserving},
                        {"signature",
                         {{"p", report.signature.p}, {"q", report.signature.q},
                          {"z", report.signature.z}}},
                        {"choi_eigenvalues", report.choi_eigenvalues}};
    out << j.dump(2) << "\n";
  } else {
    out << "dim: " << report.dim << "\n";
    out << "hermiticity_preserving: " << (report.hermiticity_preserving ? "true" : "false")
        << "\n";
    out << "completely_positive: " << (report.completely_positive ? "true" : "false") << "\n";
    out << "trace_preserving: " << (report.trace_preserving ? "true" : "false") << "\n";
    out << "signature: (" << report.signature.p << ", " << report.signature.q << ", "
        << report.signature.z << ")\n";
    out << "choi_eigenvalues:";
    for (double lam : report.choi_eigenvalues) out << " " << fmt6(lam);
    out << "\n";
  }
  return exit_code::ok;
}

inline int run_convert(const MapDocument& doc, const std::string& target,
                       const std::string& out_path, std::ostream& out) {
  MapDocument result;
  if (target == "superop") {
    if (doc.kind == "osr")
      result = make_document(superop_from_osr(to_signed_osr(doc)));
    else if (doc.kind == "choi")
      result = make_document(Superoperator(doc.dim, reshuffle(to_choi(doc).matrix())));
    else
      result = make_document(to_superoperator(doc));
  } else if (target == "choi") {
    if (doc.kind == "osr")
      result = make_document(choi_from_osr(to_signed_osr(doc)));
    else if (doc.kind == "superop")
      result = make_document(ChoiMatrix(doc.dim, reshuffle(doc.matrix)));
    else
      result = make_document(to_choi(doc));
  } else {  // osr
    if (doc.kind == "osr")
      result = doc;
    else
      result = make_document(osr_of(doc));
  }
  result.name = doc.name;
  result.description = doc.description;
  write_document(result, out_path, out);
  return exit_code::ok;
}

inline int run_extract(const MapDocument& doc, const std::string& out_path, std::ostream& out) {
  SignedOSR canonical = osr_from_choi(ChoiMatrix(doc.dim, raw_choi_of(doc)));
  MapDocument result = make_document(std::move(canonical), doc.name, doc.description);
  write_document(result, out_path, out);
  return exit_code::ok;
}

inline int run_apply(const MapDocument& doc, const ComplexMatrix& rho,
                     const std::string& format, const std::string& out_path, std::ostream& out) {
  if (rho.rows() != doc.dim || rho.cols() != doc.dim)
    throw DimensionMismatch("apply: argument matrix is not " + std::to_string(doc.dim) + "x" +
                            std::to_string(doc.dim));
  ComplexMatrix result(doc.dim, doc.dim);
  if (doc.kind == "osr") {
    result = apply_osr(to_signed_osr(doc), rho);
  } else {
    const ComplexMatrix a = doc.kind == "superop" ? doc.matrix : reshuffle(doc.matrix);
    const auto x = vec(rho);
    std::vector<Complex> y(x.size(), Complex(0.0));
    for (std::size_t r = 0; r < a.rows(); ++r)
      for (std::size_t c = 0; c < a.cols(); ++c) y[r] += a(r, c) * x[c];
    result = unvec(y, doc.dim);
  }
  const Complex tr = trace(result);
  if (!out_path.empty()) {
    emit_json({{"result", matrix_to_json(result)}, {"trace", {tr.real(), tr.imag()}}}, out_path,
              out);
  } else if (format == "json") {
    nlohmann::json j = {{"result", matrix_to_json(result)}, {"trace", {tr.real(), tr.imag()}}};
    out << j.dump(2) << "\n";
  } else {
    out << "trace: " << fmt_complex(tr) << "\n";
    out << "result:\n";
    print_matrix_text(result, out);
  }
  return exit_code::ok;
}

inline int run_equiv(const MapDocument& doc_a, const MapDocument& doc_b, double tol,
                     const std::string& format, const std::string& out_path, std::ostream& out,
                     std::ostream& err) {
  const SignedOSR a = osr_of(doc_a);
  const SignedOSR b = osr_of(doc_b);
  const EquivalenceResult res = find_equivalence(a, b, tol);

  if (res.verdict == Verdict::equivalent_no_witness)
    err << "warning: maps are equivalent but no witness was produced ("
        << to_string(*res.reason) << ")\n";

  if (format == "json") {
    nlohmann::json j = {{"verdict", to_string(res.verdict)},
                        {"choi_distance", res.choi_distance},
                        {"diagnostics",
                         {{"choi_distance", res.diagnostics.choi_distance},
                          {"expansion_residual", res.diagnostics.expansion_residual},
                          {"metric_residual", res.diagnostics.metric_residual},
                          {"operator_residual", res.diagnostics.operator_residual}}}};
    if (res.witness) {
      j["witness"] = matrix_to_json(*res.witness);
      j["metric"] = {{"p", res.metric->p}, {"q", res.metric->q}};
      j["padded_size"] = res.padded_size;
    }
    if (res.reason) j["reason"] = to_string(*res.reason);
    out << j.dump(2) << "\n";
  } else {
    if (res.verdict == Verdict::not_equivalent)
      out << "not equivalent, Choi distance " << fmt6(res.choi_distance) << "\n";
    else if (res.verdict == Verdict::equivalent_with_witness)
      out << "equivalent (witness of size " << res.padded_size << ", metric ("
          << res.metric->p << ", " << res.metric->q << "))\n";
    else
      out << "equivalent (no witness: " << to_string(*res.reason) << ")\n";
  }

  if (!out_path.empty() && res.witness) {
    emit_json({{"u", matrix_to_json(*res.witness)},
               {"metric", {{"p", res.metric->p}, {"q", res.metric->q}}},
               {"padded_size", res.padded_size}},
              out_path, out);
  }
  return res.verdict == Verdict::not_equivalent ? exit_code::not_equivalent : exit_code::ok;
}

inline int run_transform(const MapDocument& doc, std::uint64_t seed, double scale,
                         const std::string& witness_path, const std::string& out_path,
                         std::istream& in, std::ostream& out, std::ostream& err) {
  SignedOSR osr = doc.kind == "osr" ? sign_sorted(to_signed_osr(doc)) : osr_of(doc);
  if (osr.size() == 0) {  // zero map: any mixing fixes it
    write_document(make_document(osr, doc.name, doc.description), out_path, out);
    return exit_code::ok;
  }
  const Metric m(static_cast<int>(osr.positive_count()),
                 static_cast<int>(osr.negative_count()));
  ComplexMatrix u(0, 0);
  if (!witness_path.empty()) {
    const nlohmann::json wj = read_json(witness_path, in);
    if (wj.is_object() && wj.contains("u")) {  // the shape `equiv --out` writes
      u = matrix_from_json(wj["u"]);
      if (wj.contains("metric") && wj["metric"].is_object()) {
        const auto& mj = wj["metric"];
        const int tp = mj.contains("p") && mj["p"].is_number_integer() ? mj["p"].get<int>() : 0;
        const int tq = mj.contains("q") && mj["q"].is_number_integer() ? mj["q"].get<int>() : 0;
        if (tp >= m.p && tq >= m.q && tp + tq > m.size()) osr = pad_osr(osr, tp, tq);
      }
    } else {
      u = matrix_from_json(wj);
    }
    const Metric mu(static_cast<int>(osr.positive_count()),
                    static_cast<int>(osr.negative_count()));
    if (u.rows() != static_cast<std::size_t>(mu.size()) || !is_pseudo_unitary(u, mu, 1e-8))
      err << "warning: supplied matrix is not pseudo-unitary for metric (" << mu.p << ", "
          << mu.q << "); the result will not be an equivalent map\n";
  } else {
    u = random_pseudo_unitary(m, seed, scale);
  }
  SignedOSR mixed = transform_osr(osr, u);
  write_document(make_document(std::move(mixed), doc.name, doc.description), out_path, out);
  return exit_code::ok;
}

inline int run_decompose(const MapDocument& doc, const std::string& out_prefix,
                         std::ostream& out) {
  const CpDifference parts = cp_difference(osr_of(doc));
  const std::string base = doc.name.empty() ? "map" : doc.name;
  MapDocument plus = make_document(parts.plus, base + "_plus",
                                   "completely positive part of " + base);
  MapDocument minus = make_document(parts.minus, base + "_minus",
                                    "subtracted completely positive part of " + base);
  if (!out_prefix.empty()) {
    save_map(plus, out_prefix + ".plus.qmap.json");
    save_map(minus, out_prefix + ".minus.qmap.json");
  } else {
    out << nlohmann::json{{"plus", to_json(plus)}, {"minus", to_json(minus)}}.dump(2) << "\n";
  }
  return exit_code::ok;
}

}  // namespace detail

inline int run(std::vector<std::string> args, std::istream& in, std::ostream& out,
               std::ostream& err) {
  CLI::App app{"signed operator-sum maps: generate, classify, convert and relate"};
  app.require_subcommand(1);

  std::string in_path = "-";
  std::string in_path_b;
  std::string out_path;
  std::string format = "text";
  std::string convert_to;
  std::string witness_path;
  std::string fixture_name;
  double tol = 1e-8;
  double scale = 1.0;
  std::uint64_t seed = 0;
  int fix_d = 2;
  double fix_p = 0.0;
  int fix_q = 0;
  double fix_gamma = 0.0;

  auto* analyze = app.add_subcommand("analyze", "classify a map document");
  analyze->add_option("input", in_path, "map document, or - for stdin");
  analyze->add_option("--tol", tol, "classification tolerance (default 1e-8)");
  analyze->add_option("--format", format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));

  auto* convert = app.add_subcommand("convert", "rewrite a document in another representation");
  convert->add_option("input", in_path, "map document, or - for stdin");
  convert->add_option("--to", convert_to, "target kind")
      ->required()
      ->check(CLI::IsMember({"superop", "choi", "osr"}));
  convert->add_option("--out", out_path, "output path (default stdout)");

  auto* extract = app.add_subcommand("extract", "write the canonical operator-sum form");
  extract->add_option("input", in_path, "map document, or - for stdin");
  extract->add_option("--out", out_path, "output path (default stdout)");

  auto* apply = app.add_subcommand("apply", "apply a map to a matrix");
  apply->add_option("map", in_path, "map document, or - for stdin")->required();
  apply->add_option("rho", in_path_b, "matrix document {rows, cols, data}")->required();
  apply->add_option("--format", format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));
  apply->add_option("--out", out_path, "write the JSON result here instead of stdout");

  auto* equiv = app.add_subcommand("equiv", "decide whether two documents describe one map");
  equiv->add_option("a", in_path, "first map document")->required();
  equiv->add_option("b", in_path_b, "second map document")->required();
  equiv->add_option("--tol", tol, "equivalence tolerance (default 1e-8)");
  equiv->add_option("--format", format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));
  equiv->add_option("--out", out_path, "write the witness and metric here");

  auto* transform = app.add_subcommand(
      "transform", "mix the operator list by a pseudo-unitary matrix");
  transform->add_option("input", in_path, "map document, or - for stdin");
  auto* opt_seed =
      transform->add_option("--seed", seed, "seed for the random mixing matrix (default 0)");
  transform->add_option("--scale", scale, "generator half-width, 0 to 2 (default 1)")
      ->check(CLI::Range(0.0, 2.0));
  transform->add_option("--witness", witness_path, "matrix document with the mixing matrix")
      ->excludes(opt_seed);
  transform->add_option("--out", out_path, "output path (default stdout)");

  auto* decompose =
      app.add_subcommand("decompose", "split into a difference of completely positive maps");
  decompose->add_option("input", in_path, "map document, or - for stdin");
  decompose->add_option("--out", out_path,
                        "path prefix; writes <prefix>.plus.qmap.json and "
                        "<prefix>.minus.qmap.json");

  auto* gen = app.add_subcommand("gen", "write a named fixture map");
  gen->add_option("name", fixture_name,
                  "identity | transpose | completely_depolarizing | depolarizing | "
                  "amplitude_damping | random_hp")
      ->required();
  gen->add_option("--d", fix_d, "operator dimension (default 2)");
  auto* opt_p = gen->add_option("--p", fix_p, "depolarizing strength, or random_hp +1 count");
  auto* opt_q = gen->add_option("--q", fix_q, "random_hp -1 count");
  auto* opt_gamma = gen->add_option("--gamma", fix_gamma, "amplitude damping strength");
  gen->add_option("--seed", seed, "random_hp seed (default 0)");
  gen->add_option("--out", out_path, "output path (default stdout)");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return exit_code::usage;
  }

  try {
    if (*analyze)
      return detail::run_analyze(detail::read_document(in_path, in), tol, format, out, err);
    if (*convert)
      return detail::run_convert(detail::read_document(in_path, in), convert_to, out_path, out);
    if (*extract)
      return detail::run_extract(detail::read_document(in_path, in), out_path, out);
    if (*apply) {
      const MapDocument doc = detail::read_document(in_path, in);
      const ComplexMatrix rho = matrix_from_json(detail::read_json(in_path_b, in));
      return detail::run_apply(doc, rho, format, out_path, out);
    }
    if (*equiv) {
      const MapDocument doc_a = detail::read_document(in_path, in);
      const MapDocument doc_b = detail::read_document(in_path_b, in);
      return detail::run_equiv(doc_a, doc_b, tol, format, out_path, out, err);
    }
    if (*transform)
      return detail::run_transform(detail::read_document(in_path, in), seed, scale, witness_path,
                                   out_path, in, out, err);
    if (*decompose)
      return detail::run_decompose(detail::read_document(in_path, in), out_path, out);
    if (*gen) {
      FixtureParams params;
      params.dim = fix_d;
      params.seed = seed;
      if (opt_p->count() > 0) params.p = fix_p;
      if (opt_q->count() > 0) params.q = fix_q;
      if (opt_gamma->count() > 0) params.gamma = fix_gamma;
      MapDocument doc = gen_fixture(fixture_name, params);
      detail::write_document(doc, out_path, out);
      return exit_code::ok;
    }
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::bad_input;
  } catch (const ShapeError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::bad_input;
  } catch (const UnknownFixture& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::usage;
  } catch (const ParamOutOfRange& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::usage;
  } catch (const NoConvergence& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::numerical;
  } catch (const Singular& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::numerical;
  } catch (const IllConditioned& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::numerical;
  } catch (const NumericalBreakdown& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::numerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::bad_input;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::bad_input;
  }
  return exit_code::usage;
}

}  // namespace qmaps::cli
