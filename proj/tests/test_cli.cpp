#include "eastlab/cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using eastlab::cli::run;

namespace
{

struct Outcome
{
    int code;
    std::string out;
    std::string err;
};

Outcome call(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / "eastlab_cli_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::string slurp(const std::filesystem::path& path)
{
    std::ifstream in(path);
    return {std::istreambuf_iterator<char>(in), {}};
}

} // namespace

TEST_CASE("constants as JSON")
{
    const auto r = call({"constants", "--pc", "0.5", "--d", "2"});
    REQUIRE(r.code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["header"]["version"] == "0.1.0");
    CHECK(doc["header"].contains("runspec_hash"));
    CHECK(doc["beta_c"].get<double>() == doctest::Approx(0.306853).epsilon(1e-6));
    CHECK(doc["T_c"].get<double>() == doctest::Approx(std::log(2.0)));
    CHECK(doc["condition_holds"].get<bool>());
}

TEST_CASE("argument errors exit with 2")
{
    CHECK(call({"bogus"}).code == 2);
    CHECK(call({"constants"}).code == 2);
    CHECK(call({"constants", "--pc", "0.5", "--nope"}).code == 2);
    CHECK(call({"constants", "--pc", "1.5"}).code == 2);
    CHECK(call({"fpp", "--d", "0"}).code == 2);
    CHECK(call({"front", "--flavor", "sideways"}).code == 2);
    CHECK(call({"mix-exact", "--d", "2", "--L", "5"}).code != 0);
}

TEST_CASE("reruns are byte-identical and the seed matters")
{
    const auto a = call({"fpp", "--d", "2", "--L", "6", "--seed", "9"});
    const auto b = call({"fpp", "--d", "2", "--L", "6", "--seed", "9"});
    const auto c = call({"fpp", "--d", "2", "--L", "6", "--seed", "10"});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out != c.out);
    CHECK(a.out.rfind("# eastlab 0.1.0 runspec=", 0) == 0);
    CHECK(a.out.find("seed=9") != std::string::npos);
}

TEST_CASE("worker count does not change results")
{
    const std::vector<std::string> base{"rho", "--p", "0.1", "--n", "20,40", "--reps", "12", "--seed", "3"};
    auto one = base, four = base;
    one.insert(one.end(), {"--jobs", "1"});
    four.insert(four.end(), {"--jobs", "4"});
    const auto a = call(one), b = call(four);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
}

TEST_CASE("output files")
{
    const auto path = scratch("fpp.csv");
    std::filesystem::remove(path);
    const auto r = call({"fpp", "--d", "1", "--L", "5", "--out", path.string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    CHECK(slurp(path) == call({"fpp", "--d", "1", "--L", "5"}).out);

    const auto bad = call({"fpp", "--d", "1", "--L", "5", "--out", "/nonexistent/dir/x.csv"});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("cannot open output file") != std::string::npos);
}

TEST_CASE("config files with command-line override")
{
    const auto path = scratch("run.ini");
    {
        std::ofstream ini(path);
        ini << "pc = 0.6\nd = 3\n";
    }
    const auto from_file = nlohmann::json::parse(call({"constants", "--config", path.string()}).out);
    CHECK(from_file["p_c"].get<double>() == doctest::Approx(0.6));
    CHECK(from_file["d"].get<int>() == 3);
    const auto overridden = nlohmann::json::parse(call({"constants", "--config", path.string(), "--d", "2"}).out);
    CHECK(overridden["d"].get<int>() == 2);
    CHECK(overridden["p_c"].get<double>() == doctest::Approx(0.6));
    CHECK(call({"constants", "--config", scratch("missing.ini").string()}).code == 2);
}

TEST_CASE("seed from the environment")
{
    ::setenv("EASTLAB_SEED", "77", 1);
    const auto env = call({"fpp", "--d", "1", "--L", "8"});
    ::unsetenv("EASTLAB_SEED");
    CHECK(env.out == call({"fpp", "--d", "1", "--L", "8", "--seed", "77"}).out);
    CHECK(eastlab::cli::default_seed() == 1);
}

TEST_CASE("hash")
{
    CHECK(eastlab::cli::fnv1a_hex("") == "cbf29ce484222325");
    CHECK(eastlab::cli::fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("installed binary exit codes")
{
    const char* exe = std::getenv("EASTLAB_CLI");
    if (!exe)
        return;
    const std::string quiet = " >/dev/null 2>&1";
    CHECK(WEXITSTATUS(std::system((std::string(exe) + " constants --pc 0.5" + quiet).c_str())) == 0);
    CHECK(WEXITSTATUS(std::system((std::string(exe) + " bogus" + quiet).c_str())) == 2);
    CHECK(WEXITSTATUS(std::system((std::string(exe) + " --version" + quiet).c_str())) == 0);
}
