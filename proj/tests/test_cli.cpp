#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "json.hpp"

#include "qmaps/cli.hpp"
#include "qmaps/equivalence.hpp"
#include "qmaps/mapio.hpp"

using namespace qmaps;
using nlohmann::json;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run_cli(std::vector<std::string> args, const std::string& stdin_text = "") {
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  const int code = cli::run(std::move(args), in, out, err);
  return {code, out.str(), err.str()};
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  REQUIRE(f.good());
  std::stringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

void spit(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  f << content;
}

}  // namespace

TEST_CASE("gen writes parseable documents") {
  const CliResult r = run_cli({"gen", "transpose"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  const MapDocument doc = document_from_json(j);
  REQUIRE(doc.kind == "osr");
  REQUIRE(doc.dim == 2);
  REQUIRE(doc.terms.size() == 4);
  REQUIRE(to_json(doc) == j);  // nothing lost in the round trip

  const CliResult r3 = run_cli({"gen", "identity", "--d", "3"});
  REQUIRE(r3.code == 0);
  REQUIRE(document_from_json(json::parse(r3.out)).dim == 3);

  const CliResult damp = run_cli({"gen", "amplitude_damping", "--gamma", "0.25"});
  REQUIRE(damp.code == 0);
  REQUIRE(document_from_json(json::parse(damp.out)).terms.size() == 2);

  const CliResult rand1 = run_cli({"gen", "random_hp", "--p", "2", "--q", "1", "--seed", "9"});
  const CliResult rand2 = run_cli({"gen", "random_hp", "--p", "2", "--q", "1", "--seed", "9"});
  REQUIRE(rand1.code == 0);
  REQUIRE(rand1.out == rand2.out);  // same seed, same bytes
}

TEST_CASE("analyze text output on the transpose map") {
  const CliResult gen = run_cli({"gen", "transpose"});
  const CliResult r = run_cli({"analyze", "-"}, gen.out);
  REQUIRE(r.code == 0);
  REQUIRE(contains(r.out, "hermiticity_preserving: true"));
  REQUIRE(contains(r.out, "completely_positive: false"));
  REQUIRE(contains(r.out, "trace_preserving: true"));
  REQUIRE(contains(r.out, "signature: (3, 1, 0)"));
  REQUIRE(r.err.empty());
}

TEST_CASE("analyze json output reparses losslessly") {
  const CliResult gen = run_cli({"gen", "transpose"});
  const CliResult r = run_cli({"analyze", "-", "--format", "json"}, gen.out);
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  REQUIRE(j["dim"].get<int>() == 2);
  REQUIRE(j["hermiticity_preserving"].get<bool>());
  REQUIRE_FALSE(j["completely_positive"].get<bool>());
  REQUIRE(j["trace_preserving"].get<bool>());
  REQUIRE(j["signature"]["p"].get<int>() == 3);
  REQUIRE(j["signature"]["q"].get<int>() == 1);
  REQUIRE(j["signature"]["z"].get<int>() == 0);
  REQUIRE(j["choi_eigenvalues"].size() == 4);
  REQUIRE(json::parse(j.dump()) == j);
}

TEST_CASE("analyze reports rather than rejects a lopsided superoperator") {
  MapDocument doc;
  doc.kind = "superop";
  doc.dim = 2;
  ComplexMatrix m(4, 4);
  m(0, 1) = 5.0;
  doc.matrix = m;
  const CliResult r = run_cli({"analyze", "-"}, to_json(doc).dump());
  REQUIRE(r.code == 0);
  REQUIRE(contains(r.out, "hermiticity_preserving: false"));
  REQUIRE(contains(r.err, "warning"));
}

TEST_CASE("convert walks every representation") {
  const std::string t_osr = temp_path("qmaps_t.qmap.json");
  const std::string t_choi = temp_path("qmaps_t_choi.qmap.json");
  const std::string t_back = temp_path("qmaps_t_back.qmap.json");

  REQUIRE(run_cli({"gen", "transpose", "--out", t_osr}).code == 0);
  REQUIRE(run_cli({"convert", t_osr, "--to", "choi", "--out", t_choi}).code == 0);

  const MapDocument choi_doc = load_map(t_choi);
  REQUIRE(choi_doc.kind == "choi");
  ComplexMatrix swap(4, 4);
  swap(0, 0) = swap(1, 2) = swap(2, 1) = swap(3, 3) = 1.0;
  REQUIRE(frob_norm(choi_doc.matrix - swap) <= 1e-12);

  const CliResult sup = run_cli({"convert", t_choi, "--to", "superop"});
  REQUIRE(sup.code == 0);
  REQUIRE(frob_norm(document_from_json(json::parse(sup.out)).matrix - swap) <= 1e-12);

  REQUIRE(run_cli({"convert", t_choi, "--to", "osr", "--out", t_back}).code == 0);
  REQUIRE(load_map(t_back).kind == "osr");
  const CliResult eq = run_cli({"equiv", t_osr, t_back});
  REQUIRE(eq.code == 0);

  for (const auto& p : {t_osr, t_choi, t_back}) std::remove(p.c_str());
}

TEST_CASE("extract produces an equivalent canonical list") {
  const std::string dep = temp_path("qmaps_dep.qmap.json");
  const std::string canon = temp_path("qmaps_dep_canon.qmap.json");
  REQUIRE(run_cli({"gen", "depolarizing", "--p", "0.5", "--out", dep}).code == 0);
  REQUIRE(run_cli({"extract", dep, "--out", canon}).code == 0);
  REQUIRE(load_map(canon).terms.size() == 4);
  REQUIRE(run_cli({"equiv", dep, canon}).code == 0);
  std::remove(dep.c_str());
  std::remove(canon.c_str());
}

TEST_CASE("apply evaluates the map") {
  const std::string t_osr = temp_path("qmaps_apply_map.qmap.json");
  REQUIRE(run_cli({"gen", "transpose", "--out", t_osr}).code == 0);

  const ComplexMatrix rho =
      ComplexMatrix::from_rows({{1.0, Complex(2.0, 1.0)}, {3.0, 4.0}});
  const std::string rho_text = matrix_to_json(rho).dump();

  const CliResult text = run_cli({"apply", t_osr, "-"}, rho_text);
  REQUIRE(text.code == 0);
  REQUIRE(contains(text.out, "trace: 5"));
  REQUIRE(contains(text.out, "result:"));

  const CliResult as_json = run_cli({"apply", t_osr, "-", "--format", "json"}, rho_text);
  REQUIRE(as_json.code == 0);
  const json j = json::parse(as_json.out);
  ComplexMatrix expected(2, 2);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t k = 0; k < 2; ++k) expected(i, k) = rho(k, i);
  REQUIRE(frob_norm(matrix_from_json(j["result"]) - expected) <= 1e-12);
  REQUIRE(j["trace"][0].get<double>() == Catch::Approx(5.0).margin(1e-12));

  const CliResult bad = run_cli({"apply", t_osr, "-"}, matrix_to_json(ComplexMatrix(3, 3)).dump());
  REQUIRE(bad.code == 3);

  std::remove(t_osr.c_str());
}

TEST_CASE("equiv verdicts, exit codes and witness output") {
  const std::string id = temp_path("qmaps_eq_id.qmap.json");
  const std::string tr = temp_path("qmaps_eq_tr.qmap.json");
  const std::string mixed = temp_path("qmaps_eq_mixed.qmap.json");
  const std::string wit = temp_path("qmaps_eq_witness.json");
  REQUIRE(run_cli({"gen", "identity", "--out", id}).code == 0);
  REQUIRE(run_cli({"gen", "transpose", "--out", tr}).code == 0);

  SECTION("different maps") {
    const CliResult r = run_cli({"equiv", id, tr});
    REQUIRE(r.code == 1);
    REQUIRE(r.out.rfind("not equivalent", 0) == 0);
    REQUIRE(contains(r.out, "distance 2"));

    const CliResult rj = run_cli({"equiv", id, tr, "--format", "json"});
    REQUIRE(rj.code == 1);
    const json j = json::parse(rj.out);
    REQUIRE(j["verdict"].get<std::string>() == "not_equivalent");
    REQUIRE(j["choi_distance"].get<double>() == Catch::Approx(2.0).margin(1e-9));
    REQUIRE_FALSE(j.contains("witness"));
    REQUIRE(json::parse(j.dump()) == j);
  }

  SECTION("equivalent maps with a recovered witness") {
    REQUIRE(run_cli({"transform", tr, "--seed", "11", "--out", mixed}).code == 0);
    const CliResult r = run_cli({"equiv", tr, mixed, "--out", wit});
    REQUIRE(r.code == 0);
    REQUIRE(r.out.rfind("equivalent", 0) == 0);

    const json w = json::parse(slurp(wit));
    REQUIRE(w["metric"]["p"].get<int>() == 3);
    REQUIRE(w["metric"]["q"].get<int>() == 1);
    REQUIRE(w["padded_size"].get<int>() == 4);
    const ComplexMatrix u = matrix_from_json(w["u"]);
    REQUIRE(is_pseudo_unitary(u, Metric(3, 1), 1e-7));

    const CliResult rj = run_cli({"equiv", tr, mixed, "--format", "json"});
    const json j = json::parse(rj.out);
    REQUIRE(j["verdict"].get<std::string>() == "equivalent_with_witness");
    REQUIRE(j.contains("witness"));
    REQUIRE(json::parse(j.dump()) == j);

    // the emitted witness reproduces the transformed list
    const std::string rebuilt = temp_path("qmaps_eq_rebuilt.qmap.json");
    REQUIRE(run_cli({"transform", tr, "--witness", wit, "--out", rebuilt}).code == 0);
    REQUIRE(run_cli({"equiv", mixed, rebuilt}).code == 0);
    const MapDocument a = load_map(mixed);
    const MapDocument b = load_map(rebuilt);
    REQUIRE(a.terms.size() == b.terms.size());
    for (std::size_t k = 0; k < a.terms.size(); ++k)
      REQUIRE(frob_norm(a.terms[k].op - b.terms[k].op) <= 1e-8);
    std::remove(rebuilt.c_str());
  }

  for (const auto& p : {id, tr, mixed, wit}) std::remove(p.c_str());
}

TEST_CASE("transform is deterministic per seed") {
  const CliResult gen = run_cli({"gen", "transpose"});
  const CliResult a = run_cli({"transform", "-", "--seed", "4"}, gen.out);
  const CliResult b = run_cli({"transform", "-", "--seed", "4"}, gen.out);
  const CliResult c = run_cli({"transform", "-", "--seed", "5"}, gen.out);
  REQUIRE(a.code == 0);
  REQUIRE(a.out == b.out);
  REQUIRE_FALSE(a.out == c.out);
}

TEST_CASE("decompose splits into completely positive parts") {
  const CliResult gen = run_cli({"gen", "transpose"});

  const CliResult r = run_cli({"decompose", "-"}, gen.out);
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  const MapDocument plus = document_from_json(j["plus"]);
  const MapDocument minus = document_from_json(j["minus"]);
  REQUIRE(plus.terms.size() == 3);
  REQUIRE(minus.terms.size() == 1);
  for (const auto& t : plus.terms) REQUIRE(t.sign == 1);
  for (const auto& t : minus.terms) REQUIRE(t.sign == 1);

  const std::string prefix = temp_path("qmaps_split");
  const CliResult rf = run_cli({"decompose", "-", "--out", prefix}, gen.out);
  REQUIRE(rf.code == 0);
  REQUIRE(load_map(prefix + ".plus.qmap.json").terms.size() == 3);
  REQUIRE(load_map(prefix + ".minus.qmap.json").terms.size() == 1);
  std::remove((prefix + ".plus.qmap.json").c_str());
  std::remove((prefix + ".minus.qmap.json").c_str());
}

TEST_CASE("usage errors exit with code 2") {
  REQUIRE(run_cli({"frobnicate"}).code == 2);
  REQUIRE(run_cli({}).code == 2);
  REQUIRE(run_cli({"gen"}).code == 2);
  REQUIRE(run_cli({"gen", "nonesuch"}).code == 2);
  REQUIRE(run_cli({"gen", "depolarizing"}).code == 2);  // missing --p
  REQUIRE(run_cli({"gen", "random_hp", "--p", "3", "--q", "2"}).code == 2);
  REQUIRE(run_cli({"convert", "-"}).code == 2);  // missing --to
  REQUIRE(run_cli({"convert", "-", "--to", "bogus"}).code == 2);
  REQUIRE(run_cli({"equiv", "only_one.qmap.json"}).code == 2);
  REQUIRE(run_cli({"analyze", "-", "--format", "yaml"}).code == 2);
  REQUIRE(run_cli({"transform", "-", "--scale", "3"}).code == 2);
  REQUIRE(run_cli({"analyze", "-", "--frob"}).code == 2);

  const CliResult help = run_cli({"--help"});
  REQUIRE(help.code == 0);
  REQUIRE(contains(help.out, "analyze"));
  REQUIRE(contains(help.out, "equiv"));
  REQUIRE(run_cli({"analyze", "--help"}).code == 0);
}

TEST_CASE("input errors exit with code 3") {
  REQUIRE(run_cli({"analyze", "-"}, "this is not json").code == 3);
  REQUIRE(run_cli({"analyze", "no_such_file.qmap.json"}).code == 3);
  REQUIRE(run_cli({"analyze", "-"}, "{\"kind\": \"osr\"}").code == 3);

  // a stored dynamical matrix that is not hermitian cannot become an
  // operator list, though analyze will still report on it
  MapDocument doc;
  doc.kind = "choi";
  doc.dim = 2;
  ComplexMatrix m(4, 4);
  m(0, 1) = 1.0;
  doc.matrix = m;
  const std::string text = to_json(doc).dump();
  REQUIRE(run_cli({"convert", "-", "--to", "osr"}, text).code == 3);
  REQUIRE(run_cli({"analyze", "-"}, text).code == 0);

  const CliResult gen2 = run_cli({"gen", "identity"});
  const CliResult gen3 = run_cli({"gen", "identity", "--d", "3"});
  const std::string f2 = temp_path("qmaps_dim2.qmap.json");
  const std::string f3 = temp_path("qmaps_dim3.qmap.json");
  spit(f2, gen2.out);
  spit(f3, gen3.out);
  REQUIRE(run_cli({"equiv", f2, f3}).code == 3);
  std::remove(f2.c_str());
  std::remove(f3.c_str());
}

TEST_CASE("the built binary wires everything through the shell") {
  const std::string bin = QMAPS_CLI_BIN;
  const std::string tr = temp_path("qmaps_bin_tr.qmap.json");
  const std::string id = temp_path("qmaps_bin_id.qmap.json");
  const std::string txt = temp_path("qmaps_bin_out.txt");

  int rc = std::system((bin + " gen transpose --out " + tr).c_str());
  REQUIRE(WEXITSTATUS(rc) == 0);
  rc = std::system((bin + " gen identity --out " + id).c_str());
  REQUIRE(WEXITSTATUS(rc) == 0);

  rc = std::system((bin + " gen transpose | " + bin + " analyze - > " + txt).c_str());
  REQUIRE(WEXITSTATUS(rc) == 0);
  REQUIRE(contains(slurp(txt), "signature: (3, 1, 0)"));

  rc = std::system((bin + " equiv " + id + " " + tr + " > " + txt).c_str());
  REQUIRE(WEXITSTATUS(rc) == 1);
  REQUIRE(contains(slurp(txt), "not equivalent"));

  rc = std::system((bin + " equiv " + tr + " " + tr + " > " + txt).c_str());
  REQUIRE(WEXITSTATUS(rc) == 0);

  rc = std::system((bin + " frobnicate 2> /dev/null").c_str());
  REQUIRE(WEXITSTATUS(rc) == 2);
  rc = std::system((bin + " analyze missing.qmap.json 2> /dev/null").c_str());
  REQUIRE(WEXITSTATUS(rc) == 3);

  for (const auto& p : {tr, id, txt}) std::remove(p.c_str());
}
