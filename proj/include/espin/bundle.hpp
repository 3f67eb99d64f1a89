#pragma once

// Versioned, checksummed model bundle: recipe + fitted model + metadata.
//
// Layout (little-endian):
//   "ESPNBNDL"  u32 version  u32 crc32(payload)  u64 payload_length  payload
// payload is a sequence of sections: 4-byte tag, u64 length, bytes.
// Tags: RCPE (recipe), MODL (model), META (JSON text).

#include <string>

#include <zlib.h>

#include "json.hpp"

#include "espin/io.hpp"
#include "espin/learners.hpp"
#include "espin/pipeline.hpp"

namespace espin {

inline constexpr std::string_view kBundleMagic = "ESPNBNDL";
inline constexpr std::uint32_t kBundleVersion = 1;

struct ModelBundle {
  std::uint32_t version = kBundleVersion;
  Recipe recipe;
  Model model;
  nlohmann::json metadata = nlohmann::json::object();

  Eigen::VectorXd predict(std::span<const SpinRecord> rows) const { return model.predict(recipe.apply(rows)); }
};

inline std::uint32_t crc32_of(std::string_view bytes) {
  uLong c = ::crc32(0L, Z_NULL, 0);
  c = ::crc32(c, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(c);
}

inline std::string encode_bundle(const ModelBundle& b) {
  auto section = [](io::Writer& out, std::string_view tag, const std::string& body) {
    out.raw(tag);
    out.u64(body.size());
    out.raw(body);
  };
  io::Writer rw, mw, payload;
  b.recipe.serialize(rw);
  b.model.serialize(mw);
  section(payload, "RCPE", rw.bytes());
  section(payload, "MODL", mw.bytes());
  section(payload, "META", b.metadata.dump());

  io::Writer out;
  out.raw(kBundleMagic);
  out.u32(b.version);
  out.u32(crc32_of(payload.bytes()));
  out.u64(payload.bytes().size());
  out.raw(payload.bytes());
  return out.bytes();
}

inline ModelBundle decode_bundle(std::string_view bytes) {
  if (bytes.size() < kBundleMagic.size() + 16 || bytes.substr(0, kBundleMagic.size()) != kBundleMagic)
    throw Error("bundle_corrupt", "not a model bundle (bad magic or truncated header)");
  io::Reader head(bytes.substr(kBundleMagic.size()));
  const std::uint32_t version = head.u32();
  if (version != kBundleVersion)
    throw Error("bundle_version", "bundle format version " + std::to_string(version) + " is not supported (expected " +
                                      std::to_string(kBundleVersion) + ")");
  const std::uint32_t crc = head.u32();
  const std::uint64_t len = head.u64();
  const std::size_t offset = kBundleMagic.size() + 16;
  if (bytes.size() - offset != len)
    throw Error("bundle_checksum", "payload length " + std::to_string(bytes.size() - offset) + " does not match header " +
                                       std::to_string(len));
  const std::string_view payload = bytes.substr(offset);
  if (crc32_of(payload) != crc) throw Error("bundle_checksum", "bundle checksum mismatch");

  ModelBundle b;
  b.version = version;
  io::Reader rd(payload);
  bool have_recipe = false, have_model = false;
  while (!rd.done()) {
    const std::string tag(rd.take(4));
    const auto n = rd.u64();
    io::Reader body(rd.take(n));
    if (tag == "RCPE") {
      b.recipe = Recipe::deserialize(body);
      have_recipe = true;
    } else if (tag == "MODL") {
      b.model = Model::deserialize(body);
      have_model = true;
    } else if (tag == "META") {
      b.metadata = nlohmann::json::parse(body.take(n));
    }
  }
  if (!have_recipe || !have_model) throw Error("bundle_corrupt", "bundle lacks recipe or model section");
  return b;
}

inline void save_bundle(const ModelBundle& b, const std::string& path) { csv::write_file(path, encode_bundle(b)); }

inline ModelBundle load_bundle(const std::string& path) { return decode_bundle(csv::read_file(path)); }

}  // namespace espin
