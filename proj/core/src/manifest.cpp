#include "lkcell/manifest.hpp"

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

namespace lkcell {

namespace fs = std::filesystem;
using json = nlohmann::json;

DatasetManifest DatasetManifest::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw FormatError("unparseable manifest " + path + ": " + e.what());
  }
  if (!doc.contains("records") || !doc["records"].is_array()) {
    throw FormatError("manifest " + path + " has no records array");
  }

  const fs::path base = fs::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    fs::path fp(p);
    return (fp.is_absolute() ? fp : base / fp).string();
  };

  DatasetManifest m;
  std::size_t idx = 0;
  for (const auto& rec : doc["records"]) {
    ManifestRecord r;
    try {
      r.image = resolve(rec.at("image").get<std::string>());
      r.instance_mask = resolve(rec.at("instance_mask").get<std::string>());
      r.class_mask = resolve(rec.at("class_mask").get<std::string>());
      r.tissue = rec.value("tissue", std::string("unknown"));
      r.fold = rec.value("fold", 0);
    } catch (const json::exception& e) {
      throw FormatError("manifest " + path + " record " + std::to_string(idx) +
                        ": " + e.what());
    }
    if (r.fold < 0 || r.fold > 2) {
      throw ValidationError("manifest " + path + " record " + std::to_string(idx) +
                            ": fold must be in {0,1,2}, got " +
                            std::to_string(r.fold));
    }
    for (const std::string* p : {&r.image, &r.instance_mask, &r.class_mask}) {
      if (!fs::exists(*p)) {
        throw ValidationError("manifest " + path + " record " + std::to_string(idx) +
                              ": missing file " + *p);
      }
    }
    m.records.push_back(std::move(r));
    ++idx;
  }
  return m;
}

}  // namespace lkcell
