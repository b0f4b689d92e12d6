#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include <cstdlib>
#ifdef LOOPINV_CLI_PATH
#include <sys/wait.h>
#endif
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "loopinv/cli.hpp"
#include "loopinv/random.hpp"
#include "loopinv/statefile.hpp"
#include "loopinv/states.hpp"

using namespace loopinv;
using Catch::Matchers::WithinAbs;
namespace fs = std::filesystem;

namespace {

fs::path scratch_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "loopinv_tests";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(std::vector<const char*> args) {
  args.insert(args.begin(), "loopinv");
  return run_cli(static_cast<int>(args.size()), args.data());
}

std::size_t throw_offset(const std::string& path, int n_sites) {
  try {
    parse_path(path, n_sites);
  } catch (const ParseError& e) {
    return e.offset;
  }
  FAIL("expected a parse error for: " << path);
  return std::size_t(-1);
}

}  // namespace

TEST_CASE("paths parse into loops") {
  const LoopSpec plain = parse_path("0,1,2", 3);
  REQUIRE(plain.steps.size() == 3);
  REQUIRE(plain.steps[1].site == 1);
  REQUIRE_FALSE(plain.any_flipped());
  const LoopSpec flipped = parse_path("~0,~1", 3);
  REQUIRE(flipped.all_flipped());
  const LoopSpec mixed = parse_path("0,~1", 3);
  REQUIRE(mixed.any_flipped());
  REQUIRE_FALSE(mixed.all_flipped());
  const LoopSpec wide = parse_path("10,11", 12);
  REQUIRE(wide.steps[0].site == 10);
  REQUIRE(wide.steps[1].site == 11);
}

TEST_CASE("path errors carry character offsets") {
  REQUIRE(throw_offset("", 3) == 0);
  REQUIRE(throw_offset("0,a", 3) == 2);
  REQUIRE(throw_offset("0,0,1", 3) == 2);
  REQUIRE(throw_offset("0,5", 3) == 2);
  REQUIRE(throw_offset("0,1,", 3) == 4);
  REQUIRE(throw_offset("0,1 ,2", 3) == 3);
  REQUIRE(throw_offset("1", 3) == 0);
  REQUIRE(throw_offset("0,1,0", 3) == 4);
  REQUIRE(throw_offset("0,99999999999999999999", 3) == 2);
  REQUIRE_THROWS_WITH(parse_path("0,0,1", 3),
                      Catch::Matchers::ContainsSubstring("(at offset 2)"));
}

TEST_CASE("pure states survive a save and load round trip") {
  const fs::path file = scratch_file("roundtrip_pure.json");
  const PureState psi = haar_random_pure(3, 77);
  save_state_file(file.string(), psi);
  const LoadedState loaded = load_state_file(file.string());
  REQUIRE(loaded.is_pure());
  REQUIRE(loaded.n_sites() == 3);
  REQUIRE((loaded.pure().amplitudes - psi.amplitudes).norm() < 1e-15);
  REQUIRE_THAT(kempe_index_form(loaded.pure()),
               WithinAbs(kempe_index_form(psi), 1e-14));
}

TEST_CASE("mixed states survive a save and load round trip") {
  const fs::path file = scratch_file("roundtrip_mixed.json");
  const DensityMatrix rho = random_density(2, 3, 13);
  save_state_file(file.string(), rho);
  const LoadedState loaded = load_state_file(file.string());
  REQUIRE_FALSE(loaded.is_pure());
  REQUIRE(loaded.n_sites() == 2);
  REQUIRE((loaded.density().matrix - rho.matrix).cwiseAbs().maxCoeff() <
          1e-15);
}

TEST_CASE("state files with schema problems are rejected") {
  auto rejects = [](const char* name, const std::string& text) {
    const fs::path file = scratch_file(name);
    write_text(file, text);
    REQUIRE_THROWS_AS(load_state_file(file.string()), FormatError);
  };
  rejects("not_json.json", "hello");
  rejects("not_object.json", "[1, 2]");
  rejects("unknown_field.json",
          R"({"n_sites": 1, "kind": "pure", "amplitudes": [[1,0],[0,0]], "extra": 3})");
  rejects("missing_sites.json", R"({"kind": "pure", "amplitudes": []})");
  rejects("sites_zero.json",
          R"({"n_sites": 0, "kind": "pure", "amplitudes": []})");
  rejects("sites_huge.json",
          R"({"n_sites": 30, "kind": "pure", "amplitudes": []})");
  rejects("bad_kind.json",
          R"({"n_sites": 1, "kind": "foo", "amplitudes": [[1,0],[0,0]]})");
  rejects("pure_with_density.json",
          R"({"n_sites": 1, "kind": "pure", "amplitudes": [[1,0],[0,0]], "density": []})");
  rejects("mixed_with_amps.json",
          R"({"n_sites": 1, "kind": "mixed", "density": [[[1,0],[0,0]],[[0,0],[0,0]]], "amplitudes": []})");
  rejects("short_amps.json",
          R"({"n_sites": 2, "kind": "pure", "amplitudes": [[1,0],[0,0]]})");
  rejects("bad_entry.json",
          R"({"n_sites": 1, "kind": "pure", "amplitudes": [[1],[0,0]]})");
  rejects("ragged_density.json",
          R"({"n_sites": 1, "kind": "mixed", "density": [[[1,0]],[[0,0],[0,0]]]})");
  REQUIRE_THROWS_AS(load_state_file("/nonexistent/state.json"), FormatError);
}

TEST_CASE("well formed files with unphysical states propagate validation") {
  const fs::path file = scratch_file("unnormalized.json");
  write_text(file,
             R"({"n_sites": 1, "kind": "pure", "amplitudes": [[2,0],[0,0]]})");
  REQUIRE_THROWS_AS(load_state_file(file.string()), NormError);
}

TEST_CASE("compute reports loop values and the catalogue") {
  const fs::path state = scratch_file("ghz.json");
  const fs::path report_path = scratch_file("ghz_report.json");
  save_state_file(state.string(), ghz_state());
  const int rc = run({"compute", "--state", state.c_str(), "--path", "0,1",
                      "--path", "~0,~1", "--out", report_path.c_str()});
  REQUIRE(rc == 0);
  const auto report = nlohmann::json::parse(read_text(report_path));
  REQUIRE_THAT(report.at("I(01)").get<double>(), WithinAbs(0.5, 1e-12));
  REQUIRE_THAT(report.at("I(~0~1)").get<double>(), WithinAbs(0.5, 1e-12));
  const auto& cat = report.at("catalogue");
  REQUIRE_THAT(cat.at("I5").get<double>(), WithinAbs(0.25, 1e-12));
  REQUIRE_THAT(cat.at("I6").get<double>(), WithinAbs(0.25, 1e-12));
  REQUIRE_THAT(cat.at("tau_012").get<double>(), WithinAbs(1.0, 1e-9));
  REQUIRE_THAT(cat.at("tau_01").get<double>(), WithinAbs(0.0, 1e-9));
  REQUIRE_THAT(cat.at("det_S(0,1)").get<double>(), WithinAbs(0.0, 1e-12));
}

TEST_CASE("compute handles the W state") {
  const fs::path state = scratch_file("w.json");
  const fs::path report_path = scratch_file("w_report.json");
  save_state_file(state.string(), w_state());
  const int rc = run({"compute", "--state", state.c_str(), "--path", "0,1,2",
                      "--out", report_path.c_str()});
  REQUIRE(rc == 0);
  const auto report = nlohmann::json::parse(read_text(report_path));
  REQUIRE_THAT(report.at("I(012)").get<double>(),
               WithinAbs(2.0 / 9.0, 1e-12));
  const auto& cat = report.at("catalogue");
  REQUIRE_THAT(cat.at("det_S(0,1)").get<double>(),
               WithinAbs(-1.0 / 81.0, 1e-12));
  REQUIRE_THAT(cat.at("tau_01").get<double>(), WithinAbs(4.0 / 9.0, 1e-8));
}

TEST_CASE("compute skips the catalogue away from three-qubit pure states") {
  const fs::path state = scratch_file("singlet.json");
  const fs::path report_path = scratch_file("singlet_report.json");
  save_state_file(state.string(), singlet_state());
  const int rc = run({"compute", "--state", state.c_str(), "--path", "0,1",
                      "--out", report_path.c_str()});
  REQUIRE(rc == 0);
  const auto report = nlohmann::json::parse(read_text(report_path));
  REQUIRE_THAT(report.at("I(01)").get<double>(), WithinAbs(1.0, 1e-12));
  REQUIRE_FALSE(report.contains("catalogue"));
}

TEST_CASE("cli maps failure kinds to exit codes") {
  const fs::path state = scratch_file("exitcodes.json");
  save_state_file(state.string(), ghz_state());
  // bad path: argument error
  REQUIRE(run({"compute", "--state", state.c_str(), "--path", "0,0"}) == 3);
  // site out of range for the loaded state: argument error
  REQUIRE(run({"compute", "--state", state.c_str(), "--path", "0,7"}) == 3);
  // missing file: file error
  REQUIRE(run({"compute", "--state", "/nonexistent/state.json"}) == 2);
  // unknown flag: argument error
  REQUIRE(run({"compute", "--state", state.c_str(), "--bogus"}) == 3);
  // unphysical state: validation error
  const fs::path bad = scratch_file("exit_unnormalized.json");
  write_text(bad,
             R"({"n_sites": 1, "kind": "pure", "amplitudes": [[2,0],[0,0]]})");
  REQUIRE(run({"compute", "--state", bad.c_str()}) == 4);
  // unwritable report: file error
  REQUIRE(run({"compute", "--state", state.c_str(), "--out",
               "/nonexistent/dir/report.json"}) == 2);
  // bad verify configuration: argument error
  REQUIRE(run({"verify", "su2", "--trials", "0"}) == 3);
  REQUIRE(run({"verify", "bogus_suite"}) == 3);
  REQUIRE(run({"verify", "fidelity", "--samples", "10"}) == 3);
}

TEST_CASE("verify identities emits a structured passing report") {
  const fs::path report_path = scratch_file("identities_report.json");
  const int rc = run({"verify", "identities", "--trials", "25", "--seed",
                      "5", "--out", report_path.c_str()});
  REQUIRE(rc == 0);
  const auto report = nlohmann::json::parse(read_text(report_path));
  REQUIRE(report.at("suite") == "identities");
  REQUIRE(report.at("seed") == 5);
  REQUIRE(report.at("passed") == true);
  REQUIRE(report.at("results").size() == 12);
  for (const auto& row : report.at("results")) {
    REQUIRE(row.at("passed") == true);
    REQUIRE(row.at("trials") == 25);
  }
}

TEST_CASE("verify reports are byte identical for a fixed seed") {
  const fs::path a = scratch_file("repeat_a.json");
  const fs::path b = scratch_file("repeat_b.json");
  REQUIRE(run({"verify", "identities", "--trials", "10", "--seed", "42",
               "--out", a.c_str()}) == 0);
  REQUIRE(run({"verify", "identities", "--trials", "10", "--seed", "42",
               "--out", b.c_str()}) == 0);
  const std::string text = read_text(a);
  REQUIRE(text == read_text(b));
  REQUIRE_FALSE(text.empty());
}

TEST_CASE("verify su2 runs the loop family plus a mixed state row") {
  const fs::path report_path = scratch_file("su2_report.json");
  const int rc = run({"verify", "su2", "--trials", "20", "--seed", "3",
                      "--out", report_path.c_str()});
  REQUIRE(rc == 0);
  const auto report = nlohmann::json::parse(read_text(report_path));
  const auto& rows = report.at("results");
  REQUIRE(rows.size() == 6);
  REQUIRE(rows[0].at("label") == "I(01)");
  REQUIRE(rows[5].at("label") ==
          "I(0123) on rank-4 mixed 4-qubit states");
  for (const auto& row : rows) REQUIRE(row.at("passed") == true);
}

TEST_CASE("verify sl2c runs flipped quantities and both controls") {
  const fs::path report_path = scratch_file("sl2c_report.json");
  const int rc = run({"verify", "sl2c", "--trials", "30", "--seed", "4",
                      "--out", report_path.c_str()});
  REQUIRE(rc == 0);
  const auto report = nlohmann::json::parse(read_text(report_path));
  const auto& rows = report.at("results");
  REQUIRE(rows.size() == 6);
  REQUIRE(rows[3].at("label") == "det S(0,1)");
  REQUIRE(rows[4].at("label") == "I(01) under SL2C");
  REQUIRE(rows[4].contains("fraction_moved"));
  for (const auto& row : rows) REQUIRE(row.at("passed") == true);
}

TEST_CASE("verify independence reports the rank window") {
  const fs::path report_path = scratch_file("independence_report.json");
  const int rc = run({"verify", "independence", "--trials", "5", "--seed",
                      "6", "--out", report_path.c_str()});
  REQUIRE(rc == 0);
  const auto report = nlohmann::json::parse(read_text(report_path));
  const auto& row = report.at("results").at(0);
  REQUIRE(row.at("expected_rank") == 6);
  REQUIRE(row.at("min_rank") == 6);
  REQUIRE(row.at("max_rank") == 6);
  REQUIRE(row.at("passed") == true);
}

TEST_CASE("verify fidelity covers the named cases") {
  const fs::path report_path = scratch_file("fidelity_report.json");
  const int rc = run({"verify", "fidelity", "--trials", "1", "--samples",
                      "20000", "--k", "1", "--seed", "7", "--out",
                      report_path.c_str()});
  REQUIRE(rc == 0);
  const auto report = nlohmann::json::parse(read_text(report_path));
  const auto& rows = report.at("results");
  REQUIRE(rows.size() == 4);  // three cases at k=1 plus the SU(2) row
  REQUIRE(rows[3].at("label") == "GHZ, loop 01, SU(2) observables, k=1");
  for (const auto& row : rows) {
    REQUIRE(row.at("passed") == true);
    REQUIRE(row.at("samples") == 20000);
  }
}

#ifdef LOOPINV_CLI_PATH
TEST_CASE("the installed binary behaves like the library entry point") {
  const fs::path report_path = scratch_file("subprocess_report.json");
  const std::string cmd = std::string(LOOPINV_CLI_PATH) +
                          " verify identities --trials 3 --seed 2 --out " +
                          report_path.string();
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WEXITSTATUS(status) == 0);
  const auto report = nlohmann::json::parse(read_text(report_path));
  REQUIRE(report.at("passed") == true);
}
#endif
