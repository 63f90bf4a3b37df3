// Exercises the installed CLI end to end through a shell. argv[1] is the
// binary path (wired up by ctest).
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "entropy_forge/generators.hpp"
#include "entropy_forge/protocol.hpp"

using nlohmann::json;

namespace {

std::string g_binary;
std::string g_dir;

int run(const std::string& args) {
    std::string cmd = g_binary + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

}  // namespace

TEST_CASE("measure: exact real entropy of the identity construction") {
    std::string gen = g_dir + "/gen.json";
    write_file(gen, json{{"kind", "owf-builtin"}, {"name", "identity"}, {"n", 4}}.dump());
    std::string out = g_dir + "/measure.json";
    CHECK(run("measure --gen " + gen + " --kind real-shannon --seed 7 --out " + out) == 0);
    json rep = json::parse(slurp(out));
    CHECK(rep.at("value").get<double>() == doctest::Approx(4.0));
    CHECK(rep.at("method") == "exact");

    // byte-identical under seed replay
    std::string out2 = g_dir + "/measure2.json";
    CHECK(run("measure --gen " + gen + " --kind real-shannon --seed 7 --out " + out2) == 0);
    CHECK(slurp(out) == slurp(out2));

    // missing file is a usage error
    CHECK(run("measure --gen " + g_dir + "/nope.json --kind real-shannon") == 2);
}

TEST_CASE("verify-lemmas sweeps clean") {
    std::string out = g_dir + "/lemmas.json";
    CHECK(run("verify-lemmas --seed 5 --random 4 --out " + out) == 0);
    json rep = json::parse(slurp(out));
    CHECK(rep.at("all_pass").get<bool>());
    CHECK(rep.at("count").get<int>() > 0);
}

TEST_CASE("attack: resampler inverts the identity permutation") {
    std::string out = g_dir + "/attack.json";
    CHECK(run("attack --owf builtin:identity:4 --adversary resampler --retries 64 "
              "--exhaustive --seed 9 --out " + out) == 0);
    json rep = json::parse(slurp(out));
    CHECK(rep.at("success_rate").get<double>() == doctest::Approx(1.0));
}

TEST_CASE("commit, then verify") {
    std::string params = g_dir + "/params.json";
    ef::ProtocolParams p;
    p.n = 4;
    p.generator = ef::direct_product(ef::bit_blocks_generator(4), 2);
    p.h1_range_bits = 1;
    write_file(params, p.to_json().dump());

    std::string prefix = g_dir + "/session";
    CHECK(run("commit --params " + params + " --bit 1 --seed 33 --out " + prefix) == 0);
    CHECK(run("verify --params " + params + " --commitment " + prefix + ".commitment.bin" +
              " --opening " + prefix + ".opening.json") == 0);

    // determinism: the commitment bytes replay under the same seed
    std::string prefix2 = g_dir + "/session2";
    CHECK(run("commit --params " + params + " --bit 1 --seed 33 --out " + prefix2) == 0);
    CHECK(slurp(prefix + ".commitment.bin") == slurp(prefix2 + ".commitment.bin"));

    // tampered opening is rejected with exit code 1
    json opening = json::parse(slurp(prefix + ".opening.json"));
    opening["b"] = 0;
    write_file(prefix + ".opening.json", opening.dump());
    CHECK(run("verify --params " + params + " --commitment " + prefix + ".commitment.bin" +
              " --opening " + prefix + ".opening.json") == 1);
}

TEST_CASE("audit-hash passes") {
    CHECK(run("audit-hash --seed 3 --out " + g_dir + "/audit.json") == 0);
    json rep = json::parse(slurp(g_dir + "/audit.json"));
    CHECK(rep.at("all_pass").get<bool>());
}

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: test_cli <entropy-forge binary>\n");
        return 2;
    }
    g_binary = argv[1];
    char tmpl[] = "/tmp/ef-cli-XXXXXX";
    if (!mkdtemp(tmpl)) return 2;
    g_dir = tmpl;
    doctest::Context ctx;
    ctx.applyCommandLine(1, argv);
    return ctx.run();
}
