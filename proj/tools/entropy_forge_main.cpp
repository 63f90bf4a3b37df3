// entropy-forge: reproducible experiments over the library's generators,
// attacks, protocols and exact oracles. Every command is deterministic given
// its --seed; exit code 0 means all checks passed, 1 means a check failed,
// 2 means the invocation itself was bad.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include "entropy_forge/entropy.hpp"
#include "entropy_forge/errors.hpp"
#include "entropy_forge/generators.hpp"
#include "entropy_forge/hashing.hpp"
#include "entropy_forge/lemma_checks.hpp"
#include "entropy_forge/online.hpp"
#include "entropy_forge/owf_attacks.hpp"
#include "entropy_forge/protocol.hpp"
#include "entropy_forge/serialize.hpp"

using nlohmann::json;
using namespace ef;

namespace {

int thread_budget() {
    if (const char* env = std::getenv("EF_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? int(hw) : 1;
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParamError("cannot open file: " + path);
    json j;
    in >> j;
    return j;
}

void emit_report(const json& report, const std::string& out_path, const std::string& format) {
    std::string text;
    if (format == "table") {
        std::string flat = report.dump(2);
        text = flat + "\n";
    } else {
        text = report.dump(2) + "\n";
    }
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw ParamError("cannot write file: " + out_path);
        out << text;
        std::cout << out_path << "\n";
    }
}

FunctionTable parse_owf(const std::string& spec, uint64_t seed) {
    if (spec.rfind("builtin:", 0) == 0) {
        std::string rest = spec.substr(8);
        auto colon = rest.find(':');
        if (colon == std::string::npos) throw ParamError("--owf builtin:<name>:<n>");
        std::string name = rest.substr(0, colon);
        int n = std::stoi(rest.substr(colon + 1));
        return FunctionTable::builtin(name, n, seed);
    }
    return function_table_from_json(load_json(spec));
}

OnlinePtr parse_adversary(const std::string& name, const SupportPtr& support) {
    if (name == "resampler" || name == "honest-blockwise") return brute_force_resampler(support);
    if (name == "honest" || name == "honest-upfront") return honest_upfront(support);
    if (name.rfind("file:", 0) == 0) {
        json spec = load_json(name.substr(5));
        GenPtr g = generator_from_json(spec.at("generator"));
        auto sup = shared_support(g);
        std::string kind = spec.value("kind", "resampler");
        if (kind == "resampler") return brute_force_resampler(sup);
        if (kind == "honest") return honest_upfront(sup);
        throw ParamError("adversary file: unknown kind " + kind);
    }
    throw ParamError("unknown adversary: " + name);
}

// --- measure ---------------------------------------------------------------

int cmd_measure(const std::string& gen_path, const std::string& kind, const std::string& adversary,
                int block_index, double threshold, uint64_t budget, uint64_t seed,
                const std::string& out, const std::string& format) {
    GenPtr g = generator_from_json(load_json(gen_path));
    SeedStream rng = SeedStream(seed).child("measure");
    EntropyMeasurement m;
    if (kind == "real-shannon") {
        m = measure_real_shannon(g, budget, rng);
    } else if (kind == "real-min-per-block") {
        m = measure_real_min_per_block(g, block_index);
    } else if (kind == "accessible-expected" || kind == "accessible-max-tail") {
        OnlinePtr a = parse_adversary(adversary, shared_support(g));
        m = kind == "accessible-expected"
                ? measure_accessible_expected(a, budget, rng)
                : measure_accessible_max_tail(a, threshold, budget, rng);
    } else {
        throw ParamError("unknown measurement kind: " + kind);
    }
    json report = m.to_json();
    report["generator"] = g->to_json();
    report["seed"] = seed;
    emit_report(report, out, format);
    return 0;
}

// --- verify-lemmas ----------------------------------------------------------

int cmd_verify_lemmas(uint64_t seed, int random_count, uint64_t budget, const std::string& out,
                      const std::string& format) {
    LemmaCorpus corpus = builtin_lemma_corpus(seed, random_count);
    std::vector<VerificationReport> reports = verify_all_lemmas(corpus, thread_budget());
    if (budget > 0) {
        // sampled shadow runs of the checkers that support a budget
        for (const auto& [name, d] : corpus.dists) {
            for (const char* tag : {"support-size-identity", "high-entropy-tail"}) {
                auto rep = verify_lemma(tag, d, json{{"budget", budget}, {"seed", seed}});
                rep.params["instance"] = name;
                reports.push_back(std::move(rep));
            }
        }
    }
    json arr = json::array();
    bool all_pass = true;
    for (const auto& r : reports) {
        arr.push_back(r.to_json());
        all_pass = all_pass && r.pass;
    }
    json report{{"seed", seed}, {"all_pass", all_pass}, {"count", reports.size()},
                {"reports", arr}};
    emit_report(report, out, format);
    return all_pass ? 0 : 1;
}

// --- attack ------------------------------------------------------------------

int cmd_attack(std::string owf, std::string adversary, uint64_t retries, uint64_t trials,
               bool exhaustive, const std::string& preset, uint64_t seed, const std::string& out,
               const std::string& format) {
    if (preset == "resampler-vs-identity-n4") {
        owf = "builtin:identity:4";
        adversary = "resampler";
        retries = 64;
        exhaustive = true;
    } else if (!preset.empty()) {
        throw ParamError("unknown attack preset: " + preset);
    }
    FunctionTable f = parse_owf(owf, seed);
    GenPtr g = owf_generator(f, f.in_bits);
    OnlinePtr a = parse_adversary(adversary, shared_support(g));
    SeedStream rng = SeedStream(seed).child("attack");
    InversionAttack attack = [&](uint64_t y, SeedStream& r) {
        return invert_via_entropy(*a, g, y, retries, r);
    };
    AttackReport rep = exhaustive ? owf_success_exhaustive(f, attack, rng)
                                  : owf_success_probability(f, attack, trials, rng);
    json report = rep.to_json();
    report["owf"] = owf;
    report["adversary"] = adversary;
    report["retries"] = retries;
    report["seed"] = seed;
    if (f.in_bits <= 12) {
        // exact divergence between the adversary's own transcripts and its
        // transcripts embedded in the rewinding attack
        try {
            report["standalone_embedded_kl"] = standalone_embedded_kl(*a, g);
        } catch (const RegimeError&) {
        }
    }
    emit_report(report, out, format);
    return 0;
}

// --- commit / verify ------------------------------------------------------------

int cmd_commit(const std::string& params_path, int bit, const std::string& transport,
               uint64_t seed, const std::string& out, const std::string& format) {
    ProtocolParams params = ProtocolParams::from_json(load_json(params_path));
    SeedStream rng = SeedStream(seed);

    if (transport.rfind("tcp-listen:", 0) == 0) {
        int port = std::stoi(transport.substr(11));
        ReceiverCommitResult res = run_commit_receiver_tcp(params, seed, port);
        std::ofstream cbin(out + ".commitment.bin", std::ios::binary);
        cbin.write((const char*)res.commitment.data(), (std::streamsize)res.commitment.size());
        json report{{"role", "receiver"}, {"masked_round", res.masked_round},
                    {"commitment_file", out + ".commitment.bin"}};
        emit_report(report, "", format);
        return 0;
    }

    CommitResult res;
    if (transport == "inproc") {
        res = run_commit(params, bit, rng.child("sender-seed").next_u64(),
                         rng.child("receiver-seed").next_u64());
    } else if (transport.rfind("tcp:", 0) == 0) {
        std::string rest = transport.substr(4);
        auto colon = rest.rfind(':');
        if (colon == std::string::npos) throw ParamError("--transport tcp:<host>:<port>");
        res = run_commit_sender_tcp(params, bit, rng.child("sender-seed").next_u64(),
                                    rest.substr(0, colon), std::stoi(rest.substr(colon + 1)));
    } else {
        throw ParamError("unknown transport: " + transport);
    }

    std::string prefix = out.empty() ? std::string("commit") : out;
    {
        std::ofstream cbin(prefix + ".commitment.bin", std::ios::binary);
        if (!cbin) throw ParamError("cannot write " + prefix + ".commitment.bin");
        cbin.write((const char*)res.commitment.data(), (std::streamsize)res.commitment.size());
    }
    {
        std::ofstream ojson(prefix + ".opening.json", std::ios::binary);
        ojson << res.opening.to_json().dump(2) << "\n";
    }
    {
        json frames = json::array();
        for (const Frame& f : res.transcript)
            frames.push_back(json{{"type", int(f.type)},
                                  {"payload_hex", bytes_to_hex(std::string(f.payload.begin(),
                                                                           f.payload.end()))}});
        std::ofstream tjson(prefix + ".transcript.json", std::ios::binary);
        tjson << json{{"masked_round", res.masked_round}, {"frames", frames}}.dump(2) << "\n";
    }
    // inproc round trip self-check
    auto echoed = reveal_verify(res.commitment, res.opening, params);
    json report{{"role", "sender"},
                {"bit", bit},
                {"masked_round", res.masked_round},
                {"commitment_file", prefix + ".commitment.bin"},
                {"opening_file", prefix + ".opening.json"},
                {"self_verify", echoed ? json(*echoed) : json(nullptr)}};
    emit_report(report, "", format);
    return (echoed && *echoed == bit) ? 0 : 1;
}

int cmd_verify(const std::string& params_path, const std::string& commitment_path,
               const std::string& opening_path, const std::string& format) {
    ProtocolParams params = ProtocolParams::from_json(load_json(params_path));
    std::ifstream cbin(commitment_path, std::ios::binary);
    if (!cbin) throw ParamError("cannot open " + commitment_path);
    std::vector<uint8_t> commitment((std::istreambuf_iterator<char>(cbin)),
                                    std::istreambuf_iterator<char>());
    Opening opening = Opening::from_json(load_json(opening_path), params);
    auto bit = reveal_verify(commitment, opening, params);
    json report{{"accepted", bool(bit)}, {"bit", bit ? json(*bit) : json(nullptr)}};
    emit_report(report, "", format);
    return bit ? 0 : 1;
}

// --- audit-hash -------------------------------------------------------------------

int cmd_audit_hash(uint64_t seed, const std::string& out, const std::string& format) {
    (void)seed;
    json findings = json::array();
    bool all_pass = true;
    auto note = [&](const std::string& what, double bound, double measured, bool pass) {
        findings.push_back(
            json{{"check", what}, {"bound", bound}, {"measured", measured}, {"pass", pass}});
        all_pass = all_pass && pass;
    };

    // two-universality by full enumeration at small degrees
    for (int s = 1; s <= 4; ++s) {
        for (int range = 1; range <= s; ++range) {
            HashFamilySpec mult{HashKind::FieldMultiplyTruncate, s, range, 1,
                                TcrMode::OracleBacked, 0};
            HashFamilySpec poly{HashKind::PolyEllWise, s, range, 2, TcrMode::OracleBacked, 0};
            HashFamilySpec mat{HashKind::BooleanMatrix, s, range, 1, TcrMode::OracleBacked, 0};
            double bound = std::exp2(double(-range));
            for (const auto& fam : {mult, poly, mat}) {
                double worst = 0.0;
                for (uint64_t x = 0; x < (uint64_t(1) << s); ++x)
                    for (uint64_t x2 = x + 1; x2 < (uint64_t(1) << s); ++x2)
                        worst = std::max(worst, exact_collision_probability(fam, Bits(x, s),
                                                                            Bits(x2, s))
                                                    .to_double());
                note(std::string("two-universal/") + hash_kind_name(fam.kind) + "/s=" +
                         std::to_string(s) + "/t=" + std::to_string(range),
                     bound, worst, worst <= bound + 1e-12);
            }
        }
    }

    // joint uniformity of the degree-(ell-1) family at s=3, ell=3
    {
        HashFamilySpec fam{HashKind::PolyEllWise, 3, 3, 3, TcrMode::OracleBacked, 0};
        bool uniform = ell_wise_joint_uniform_exact(fam, {Bits(1, 3), Bits(3, 3), Bits(6, 3)});
        note("ell-wise-joint-uniformity/s=3/ell=3", 1.0, uniform ? 1.0 : 0.0, uniform);
    }

    // extractor distance on fixed subsets
    {
        HashFamilySpec fam{HashKind::FieldMultiplyTruncate, 10, 2, 1, TcrMode::OracleBacked, 0};
        std::vector<Bits> subset;
        for (uint64_t v = 0; v < 64; ++v) subset.push_back(Bits(v, 10));
        double sd = leftover_hash_distance(fam, subset).to_double();
        double budget = leftover_hash_budget(2, 6.0);
        note("leftover/s=10/k=6/m=2", budget, sd, sd <= budget + 1e-12);
    }

    json report{{"all_pass", all_pass}, {"checks", findings}};
    emit_report(report, out, format);
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"inaccessible-entropy generators, attacks and commitments"};
    app.require_subcommand(1);

    std::string out, format = "json";
    uint64_t seed = 1;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--out", out, "output file (defaults to stdout)");
        cmd->add_option("--format", format, "json|table")->check(CLI::IsMember({"json", "table"}));
        cmd->add_option("--seed", seed, "master seed");
    };

    // measure
    auto* measure = app.add_subcommand("measure", "entropy measurements of a generator");
    std::string gen_path, kind = "real-shannon", adversary = "resampler";
    int block_index = -1;
    double threshold = 0.0;
    uint64_t budget = 0;
    measure->add_option("--gen", gen_path, "generator spec JSON")->required();
    measure->add_option("--kind", kind,
                        "real-shannon|real-min-per-block|accessible-expected|accessible-max-tail");
    measure->add_option("--adversary", adversary, "resampler|honest|honest-blockwise|file:PATH");
    measure->add_option("--block", block_index, "block index for real-min-per-block");
    measure->add_option("--threshold", threshold, "threshold for accessible-max-tail");
    measure->add_option("--budget", budget, "sampling budget (0 = exact)");
    add_common(measure);

    // verify-lemmas
    auto* lemmas = app.add_subcommand("verify-lemmas", "sweep the exact lemma checkers");
    int random_count = 8;
    uint64_t lemma_budget = 0;
    lemmas->add_option("--random", random_count, "random corpus instances");
    lemmas->add_option("--budget", lemma_budget, "sampling budget (unused in exact mode)");
    add_common(lemmas);

    // attack
    auto* attack = app.add_subcommand("attack", "rewinding inversion experiments");
    std::string owf = "builtin:identity:4", preset;
    uint64_t retries = 64, trials = 256;
    bool exhaustive = false;
    attack->add_option("--owf", owf, "builtin:<name>:<n> or a table JSON path");
    attack->add_option("--adversary", adversary, "resampler|honest|file:PATH");
    attack->add_option("--retries", retries, "draws allowed per block");
    attack->add_option("--trials", trials, "random targets");
    attack->add_flag("--exhaustive", exhaustive, "attack every image point once");
    attack->add_option("--preset", preset, "named experiment, e.g. resampler-vs-identity-n4");
    add_common(attack);

    // commit
    auto* commit = app.add_subcommand("commit", "run the commit stage");
    std::string params_path, transport = "inproc";
    int bit = 0;
    commit->add_option("--params", params_path, "protocol parameter JSON")->required();
    commit->add_option("--bit", bit, "committed bit")->check(CLI::Range(0, 1));
    commit->add_option("--transport", transport, "inproc|tcp:<host>:<port>|tcp-listen:<port>");
    add_common(commit);

    // verify
    auto* verify = app.add_subcommand("verify", "verify an opening against a commitment");
    std::string commitment_path, opening_path;
    verify->add_option("--params", params_path, "protocol parameter JSON")->required();
    verify->add_option("--commitment", commitment_path, "commitment binary")->required();
    verify->add_option("--opening", opening_path, "opening JSON")->required();
    add_common(verify);

    // audit-hash
    auto* audit = app.add_subcommand("audit-hash", "exhaustive hash family audits");
    add_common(audit);

    CLI11_PARSE(app, argc, argv);

    try {
        if (measure->parsed())
            return cmd_measure(gen_path, kind, adversary, block_index, threshold, budget, seed, out,
                               format);
        if (lemmas->parsed()) return cmd_verify_lemmas(seed, random_count, lemma_budget, out, format);
        if (attack->parsed())
            return cmd_attack(owf, adversary, retries, trials, exhaustive, preset, seed, out,
                              format);
        if (commit->parsed()) return cmd_commit(params_path, bit, transport, seed, out, format);
        if (verify->parsed()) return cmd_verify(params_path, commitment_path, opening_path, format);
        if (audit->parsed()) return cmd_audit_hash(seed, out, format);
    } catch (const RegimeError& e) {
        std::cerr << "regime error: " << e.what() << "\n";
        return 2;
    } catch (const ParamError& e) {
        std::cerr << "parameter error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
