#pragma once

#include <string>
#include <vector>

#include "lkcell/errors.hpp"

namespace lkcell {

// One dataset record. Paths are stored resolved (relative entries are taken
// relative to the manifest file's directory).
struct ManifestRecord {
  std::string image;
  std::string instance_mask;
  std::string class_mask;
  std::string tissue;
  int fold = 0;
};

// JSON document:
//   { "schema_version": 1,
//     "records": [ { "image": ..., "instance_mask": ..., "class_mask": ...,
//                    "tissue": ..., "fold": 0|1|2 }, ... ] }
// Loading validates that every referenced path exists and folds are in
// {0, 1, 2}.
struct DatasetManifest {
  std::vector<ManifestRecord> records;

  static DatasetManifest load(const std::string& path);
};

}  // namespace lkcell
