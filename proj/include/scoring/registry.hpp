#pragma once

// Versioned store of scoring models. Readers take an immutable snapshot and
// keep it for the whole request; writers build a new snapshot, persist the
// model file, then publish.

#include "scoring/errors.hpp"
#include "scoring/model.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace scoring {

enum class Severity { Error, Warning };

struct ValidationFinding {
  Severity severity = Severity::Error;
  std::string code;
  std::string message;
  std::string location;

  friend bool operator==(const ValidationFinding&, const ValidationFinding&) = default;
};

std::string_view to_string(Severity s);
nlohmann::json findings_to_json(const std::vector<ValidationFinding>& findings);
bool has_errors(const std::vector<ValidationFinding>& findings);

// Findings ordered by (location, code, message).
std::vector<ValidationFinding> validate_model(const ScoringModel& model);

class ValidationRejected : public ScoringError {
public:
  explicit ValidationRejected(std::vector<ValidationFinding> findings);
  const std::vector<ValidationFinding>& findings() const { return findings_; }

private:
  std::vector<ValidationFinding> findings_;
};

// base_version in a write did not match the stored version.
class VersionConflict : public ScoringError {
public:
  VersionConflict(std::int64_t model_id, std::int64_t expected, std::int64_t actual);
};

struct RegistrySnapshot {
  std::map<std::int64_t, ScoringModel> models;
  std::uint64_t snapshot_version = 1;

  friend bool operator==(const RegistrySnapshot&, const RegistrySnapshot&) = default;
};

using SnapshotPtr = std::shared_ptr<const RegistrySnapshot>;

std::filesystem::path model_file_path(const std::filesystem::path& dir, std::int64_t model_id);

// Reads every `*.json` file in `dir`. Throws MalformedModelFile on the first
// file that fails to decode or validate, IoFailure if the directory cannot be
// read.
SnapshotPtr load_registry(const std::filesystem::path& dir);

// Copy-on-write insert/replace. The stored version becomes previous + 1 (1
// for a new id), the model file is written to `dir` before the new snapshot
// is returned, and `snapshot_in` is left untouched.
// Throws ValidationRejected, IoFailure.
SnapshotPtr upsert_model(const RegistrySnapshot& snapshot_in, ScoringModel model,
                         const std::filesystem::path& dir);

// Throws ModelNotFound, IoFailure.
SnapshotPtr delete_model(const RegistrySnapshot& snapshot_in, std::int64_t model_id,
                         const std::filesystem::path& dir);

// Throws ModelNotFound.
const ScoringModel& get_model(const RegistrySnapshot& snapshot, std::int64_t model_id);

// Shared registry handle. Readers copy the current snapshot pointer; writers
// are serialized and publish a new snapshot only after the file is on disk.
class ModelStore {
public:
  explicit ModelStore(std::filesystem::path dir);
  ModelStore(std::filesystem::path dir, SnapshotPtr initial);

  SnapshotPtr snapshot() const;
  const std::filesystem::path& directory() const { return dir_; }

  // Optional base_version enforces optimistic concurrency; throws
  // VersionConflict when it differs from the stored model's version.
  SnapshotPtr upsert(ScoringModel model, std::optional<std::int64_t> base_version = std::nullopt);
  SnapshotPtr remove(std::int64_t model_id);

private:
  void publish(SnapshotPtr next);

  std::filesystem::path dir_;
  mutable std::mutex read_mu_;
  std::mutex write_mu_;
  SnapshotPtr current_;
};

}  // namespace scoring
