#include "entropy_forge/serialize.hpp"

#include "entropy_forge/errors.hpp"

namespace ef {

using nlohmann::json;

std::string bytes_to_hex(const std::string& bytes) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (unsigned char c : bytes) {
        out.push_back(digits[c >> 4]);
        out.push_back(digits[c & 0xf]);
    }
    return out;
}

std::string hex_to_bytes(const std::string& hex) {
    if (hex.size() % 2 != 0) throw ParamError("hex_to_bytes: odd length");
    auto nib = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw ParamError("hex_to_bytes: bad digit");
    };
    std::string out;
    out.reserve(hex.size() / 2);
    for (size_t i = 0; i < hex.size(); i += 2)
        out.push_back(char((nib(hex[i]) << 4) | nib(hex[i + 1])));
    return out;
}

json distribution_to_json(const Distribution& d) {
    json outcomes = json::array();
    for (const std::string& o : d.outcomes()) outcomes.push_back(bytes_to_hex(o));
    int bytes = d.outcomes().empty() ? 0 : (int)d.outcomes().front().size();
    return json{{"schema", {bytes}},
                {"outcomes_hex", outcomes},
                {"weight_num", d.weight_num()},
                {"weight_denom_log2", d.denom_log2()}};
}

Distribution distribution_from_json(const json& j) {
    std::vector<std::string> outcomes;
    for (const auto& h : j.at("outcomes_hex")) outcomes.push_back(hex_to_bytes(h.get<std::string>()));
    return Distribution(std::move(outcomes), j.at("weight_num").get<std::vector<uint64_t>>(),
                        j.at("weight_denom_log2").get<int>());
}

json joint_to_json(const JointDistribution& jd) {
    json out = distribution_to_json(jd.dist());
    out["schema"] = jd.schema();
    return out;
}

JointDistribution joint_from_json(const json& j) {
    std::vector<std::string> outcomes;
    for (const auto& h : j.at("outcomes_hex")) outcomes.push_back(hex_to_bytes(h.get<std::string>()));
    Distribution d(std::move(outcomes), j.at("weight_num").get<std::vector<uint64_t>>(),
                   j.at("weight_denom_log2").get<int>());
    return JointDistribution(std::move(d), j.at("schema").get<std::vector<int>>());
}

json hash_family_to_json(const HashFamilySpec& f) {
    json out{{"kind", hash_kind_name(f.kind)},
             {"domain_bits", f.domain_bits},
             {"range_bits", f.range_bits},
             {"ell", f.ell}};
    if (f.kind == HashKind::TcrStandin) {
        out["tcr_mode"] = f.tcr_mode == TcrMode::OracleBacked ? "oracle" : "mix";
        out["tcr_instance"] = f.tcr_instance;
    }
    return out;
}

HashFamilySpec hash_family_from_json(const json& j) {
    HashFamilySpec f;
    f.kind = hash_kind_from_name(j.at("kind").get<std::string>());
    f.domain_bits = j.at("domain_bits").get<int>();
    f.range_bits = j.at("range_bits").get<int>();
    f.ell = j.value("ell", 1);
    if (f.kind == HashKind::TcrStandin) {
        f.tcr_mode = j.value("tcr_mode", std::string("oracle")) == "mix" ? TcrMode::KeyedMix
                                                                         : TcrMode::OracleBacked;
        f.tcr_instance = j.value("tcr_instance", 0);
    }
    f.validate();
    return f;
}

json hash_function_to_json(const HashFunction& h) {
    json out = hash_family_to_json(h.family);
    out["key_hex"] = h.key.to_hex();
    return out;
}

HashFunction hash_function_from_json(const json& j) {
    HashFamilySpec f = hash_family_from_json(j);
    Bits key = Bits::from_hex(j.at("key_hex").get<std::string>(), f.key_bits());
    return HashFunction{f, key};
}

json function_table_to_json(const FunctionTable& f) {
    json rows = json::array();
    for (uint64_t v : f.table) rows.push_back(Bits(v, f.out_bits).to_hex());
    return json{{"in_bits", f.in_bits}, {"out_bits", f.out_bits}, {"table_hex", rows}};
}

FunctionTable function_table_from_json(const json& j) {
    FunctionTable f;
    f.in_bits = j.at("in_bits").get<int>();
    f.out_bits = j.at("out_bits").get<int>();
    for (const auto& h : j.at("table_hex"))
        f.table.push_back(Bits::from_hex(h.get<std::string>(), f.out_bits).to_u64());
    f.validate();
    return f;
}

}  // namespace ef
