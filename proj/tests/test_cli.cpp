#include "cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result call(std::vector<std::string> args) {
  args.insert(args.begin(), "vfb");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = vfb::cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / "vfb_test_cli";
  fs::create_directories(dir);
  return dir;
}

std::string write_config(const std::string& name, const std::string& stepper = "{\"n_y\": 65, \"t_end\": 2}") {
  const fs::path path = scratch() / name;
  std::ofstream(path) << R"({"model": {"d": 1, "theta": 1, "a": 1, "b": 2, "c": 1, "k": 2, "q": 1, "mu": 1, "beta": 1, "h0": 0.4}, "stepper": )"
                      << stepper << "}";
  return path.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("thresholds") {
  const Result r = call({"thresholds", "--config", write_config("ref.json")});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["r0"].get<double>() == doctest::Approx(4.0));
  CHECK(j["lambda_cap"].get<double>() == doctest::Approx(1.8137993642342178).epsilon(1e-15));
  CHECK(j["d_cap"].get<double>() > 0);
  CHECK(j["equilibrium_triple"][2].get<double>() == doctest::Approx(0.5351837584879964).epsilon(1e-14));
}

TEST_CASE("eigen") {
  const Result r = call({"eigen", "--config", write_config("ref.json"), "--m", "1", "--l", "0.8"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["lambda1"].get<double>() == doctest::Approx(-0.14991307311783568).epsilon(1e-13));
}

TEST_CASE("certificate") {
  const Result r = call({"certificate", "--config", write_config("ref.json"), "--l", "0.8"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["applicable"] == true);
  const auto& c = j["certificate"];
  CHECK(c["mu0"].get<double>() * c["M"].get<double>() == doctest::Approx(0.0538886780437297).epsilon(1e-9));
}

TEST_CASE("usage errors exit 2") {
  const Result unknown = call({"frobnicate"});
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find("simulate") != std::string::npos);
  CHECK(call({}).code == 2);
  CHECK(call({"eigen", "--config", write_config("ref.json")}).code == 2);
}

TEST_CASE("input errors exit 2 with a JSON error object") {
  const fs::path bad = scratch() / "bad.json";
  std::ofstream(bad) << R"({"model": {"d": -1, "theta": 1, "a": 1, "b": 2, "c": 1, "k": 2, "q": 1, "mu": 1, "beta": 1, "h0": 0.4}})";
  const Result r = call({"thresholds", "--config", bad.string()});
  CHECK(r.code == 2);
  const std::string last = r.err.substr(r.err.find('{'));
  const auto j = nlohmann::json::parse(last);
  CHECK(j["error"]["kind"] == "validation");
  CHECK(j["error"]["message"] == "model.d must be positive");
  CHECK(j["error"]["exit_code"] == 2);
  CHECK(call({"thresholds", "--config", (scratch() / "missing.json").string()}).code == 2);
}

TEST_CASE("numerical failures exit 3") {
  // gamma = 5 spreads, so the lower endpoint is not a Vanishing run
  const std::string cfg = write_config("search.json", "{\"n_y\": 65, \"t_end\": 100}");
  const Result r = call({"threshold-search", "--config", cfg, "--lo", "5", "--hi", "10", "--no-certificate"});
  CHECK(r.code == 3);
  CHECK(r.err.find("bracket_invalid") != std::string::npos);
}

TEST_CASE("simulate writes outputs deterministically") {
  const std::string cfg = write_config("sim.json");
  const fs::path a = scratch() / "run_a";
  const fs::path b = scratch() / "run_b";
  fs::remove_all(a);
  fs::remove_all(b);
  const Result ra = call({"simulate", "--config", cfg, "--out", a.string()});
  REQUIRE(ra.code == 0);
  for (const char* f : {"effective_config.json", "series.csv", "profiles.csv", "summary.json"})
    CHECK(fs::exists(a / f));
  CHECK(slurp(a / "series.csv").rfind("t,g,h,width,max_w,max_v,u_center\n", 0) == 0);

  // the echoed config reproduces the run byte for byte
  const Result rb = call({"simulate", "--config", (a / "effective_config.json").string(), "--out", b.string()});
  REQUIRE(rb.code == 0);
  for (const char* f : {"series.csv", "profiles.csv", "summary.json"}) CHECK(slurp(a / f) == slurp(b / f));
  CHECK(ra.out == rb.out);
}

TEST_CASE("ode baseline") {
  const Result r = call({"ode-baseline", "--config", write_config("ref.json"), "--t-end", "1", "--every", "50"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("t,u,v,w\n", 0) == 0);
}
