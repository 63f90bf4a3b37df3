#pragma once

#include <json.hpp>

#include "entropy_forge/distribution.hpp"
#include "entropy_forge/generators.hpp"
#include "entropy_forge/hashing.hpp"

namespace ef {

std::string bytes_to_hex(const std::string& bytes);
std::string hex_to_bytes(const std::string& hex);

// {schema, outcomes_hex, weight_num, weight_denom_log2}; schema is the
// per-coordinate byte-length list ([total] for a plain distribution).
nlohmann::json distribution_to_json(const Distribution& d);
Distribution distribution_from_json(const nlohmann::json& j);
nlohmann::json joint_to_json(const JointDistribution& j);
JointDistribution joint_from_json(const nlohmann::json& j);

// {kind, domain_bits, range_bits, ell, key_hex}
nlohmann::json hash_function_to_json(const HashFunction& h);
HashFunction hash_function_from_json(const nlohmann::json& j);
nlohmann::json hash_family_to_json(const HashFamilySpec& f);
HashFamilySpec hash_family_from_json(const nlohmann::json& j);

nlohmann::json function_table_to_json(const FunctionTable& f);
FunctionTable function_table_from_json(const nlohmann::json& j);

}  // namespace ef
