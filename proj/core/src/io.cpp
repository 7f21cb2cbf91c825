#include "fbbai/io.hpp"

#include <array>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace fbbai {

BanditInstance parse_instance_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("instance JSON: ") + e.what());
  }
  BanditInstance instance;
  instance.family = family_from_name(j.at("family").get<std::string>());
  instance.means = j.at("means").get<std::vector<double>>();
  instance.sigma = j.value("sigma", 1.0);
  validate_instance(instance);
  return instance;
}

BanditInstance load_instance(const std::string& path) {
  try {
    return parse_instance_json(read_file(path));
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void save_instance(const BanditInstance& instance, const std::string& path) {
  validate_instance(instance);
  nlohmann::ordered_json j;
  j["family"] = family_name(instance.family);
  if (instance.family == Family::kGaussian) j["sigma"] = instance.sigma;
  j["means"] = instance.means;
  write_file(path, j.dump(2) + "\n");
}

std::string complexity_name(const Complexity& h) {
  switch (h.kind) {
    case ComplexityKind::kH1:
      return "h1";
    case ComplexityKind::kH2:
      return "h2";
    case ComplexityKind::kConstant: {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "const:%.17g", h.constant);
      return buf;
    }
  }
  throw std::logic_error("complexity name: unknown kind");
}

Complexity complexity_from_name(const std::string& name) {
  Complexity h;
  if (name == "h1") {
    h.kind = ComplexityKind::kH1;
  } else if (name == "h2") {
    h.kind = ComplexityKind::kH2;
  } else if (name.rfind("const:", 0) == 0) {
    h.kind = ComplexityKind::kConstant;
    const std::string value = name.substr(6);
    std::size_t used = 0;
    h.constant = std::stod(value, &used);
    if (used != value.size())
      throw std::invalid_argument("complexity: bad constant in '" + name + "'");
  } else {
    throw std::invalid_argument("complexity: unknown measure '" + name + "'");
  }
  return h;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  if (in.bad()) throw std::runtime_error("read failed: " + path);
  return out.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out.good()) throw std::runtime_error("write failed: " + path);
}

namespace {

inline std::uint32_t rotl32(std::uint32_t v, int s) {
  return (v << s) | (v >> (32 - s));
}

}  // namespace

std::string sha1_hex(std::string_view bytes) {
  std::array<std::uint32_t, 5> h = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu,
                                    0x10325476u, 0xC3D2E1F0u};
  const std::uint64_t bit_len = static_cast<std::uint64_t>(bytes.size()) * 8;

  std::string msg(bytes);
  msg.push_back(static_cast<char>(0x80));
  while (msg.size() % 64 != 56) msg.push_back('\0');
  for (int i = 7; i >= 0; --i)
    msg.push_back(static_cast<char>((bit_len >> (8 * i)) & 0xFF));

  std::array<std::uint32_t, 80> w{};
  for (std::size_t chunk = 0; chunk < msg.size(); chunk += 64) {
    for (int i = 0; i < 16; ++i) {
      w[i] = 0;
      for (int b = 0; b < 4; ++b)
        w[i] = (w[i] << 8) | static_cast<std::uint8_t>(msg[chunk + 4 * i + b]);
    }
    for (int i = 16; i < 80; ++i)
      w[i] = rotl32(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);

    std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
    for (int i = 0; i < 80; ++i) {
      std::uint32_t f, k;
      if (i < 20) {
        f = (b & c) | (~b & d);
        k = 0x5A827999u;
      } else if (i < 40) {
        f = b ^ c ^ d;
        k = 0x6ED9EBA1u;
      } else if (i < 60) {
        f = (b & c) | (b & d) | (c & d);
        k = 0x8F1BBCDCu;
      } else {
        f = b ^ c ^ d;
        k = 0xCA62C1D6u;
      }
      const std::uint32_t tmp = rotl32(a, 5) + f + e + k + w[i];
      e = d;
      d = c;
      c = rotl32(b, 30);
      b = a;
      a = tmp;
    }
    h[0] += a;
    h[1] += b;
    h[2] += c;
    h[3] += d;
    h[4] += e;
  }

  char out[41];
  std::snprintf(out, sizeof(out), "%08x%08x%08x%08x%08x", h[0], h[1], h[2], h[3], h[4]);
  return out;
}

std::string git_blob_hash(std::string_view content) {
  std::string framed = "blob " + std::to_string(content.size());
  framed.push_back('\0');
  framed.append(content);
  return sha1_hex(framed);
}

}  // namespace fbbai
