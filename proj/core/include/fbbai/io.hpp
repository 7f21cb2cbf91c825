#pragma once

#include <string>
#include <string_view>

#include "fbbai/bandit.hpp"
#include "fbbai/divergence.hpp"

namespace fbbai {

// Instance files: {"family":"bernoulli"|"gaussian","sigma":number?,"means":[...]}.
BanditInstance parse_instance_json(const std::string& text);
BanditInstance load_instance(const std::string& path);
void save_instance(const BanditInstance& instance, const std::string& path);

std::string complexity_name(const Complexity& h);
Complexity complexity_from_name(const std::string& name);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

// SHA-1 of the git blob framing "blob <len>\0<content>"; hex digest.
std::string sha1_hex(std::string_view bytes);
std::string git_blob_hash(std::string_view content);

}  // namespace fbbai
