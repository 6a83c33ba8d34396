#include "scoring/registry.hpp"

#include "scoring/codec.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace scoring {

namespace fs = std::filesystem;

namespace {

std::string summarize(const std::vector<ValidationFinding>& findings) {
  std::string msg;
  for (const auto& f : findings) {
    if (f.severity != Severity::Error) continue;
    if (!msg.empty()) msg += "; ";
    msg += f.code + " at " + f.location + ": " + f.message;
  }
  return msg;
}

void write_file_atomically(const fs::path& target, const std::string& contents) {
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoFailure("cannot open " + tmp.string() + " for writing");
    out << contents;
    out.flush();
    if (!out) throw IoFailure("failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoFailure("cannot replace " + target.string() + ": " + ec.message());
  }
}

}  // namespace

ValidationRejected::ValidationRejected(std::vector<ValidationFinding> findings)
    : ScoringError("validation_rejected", "model rejected: " + summarize(findings),
                   {{"findings", findings_to_json(findings)}}),
      findings_(std::move(findings)) {}

VersionConflict::VersionConflict(std::int64_t model_id, std::int64_t expected, std::int64_t actual)
    : ScoringError("malformed_request",
                   "model " + std::to_string(model_id) + " is at version " + std::to_string(actual) +
                       ", not base_version " + std::to_string(expected),
                   {{"model_id", model_id}, {"base_version", expected}, {"current_version", actual}}) {}

fs::path model_file_path(const fs::path& dir, std::int64_t model_id) {
  return dir / ("model-" + std::to_string(model_id) + ".json");
}

SnapshotPtr load_registry(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoFailure("models directory not readable: " + dir.string());
  std::vector<fs::path> files;
  for (fs::directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec)) {
    if (it->is_regular_file() && it->path().extension() == ".json") files.push_back(it->path());
  }
  if (ec) throw IoFailure("cannot list " + dir.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());

  auto snap = std::make_shared<RegistrySnapshot>();
  snap->snapshot_version = 1;
  for (const auto& path : files) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot read " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    ScoringModel model;
    try {
      model = model_from_json(nlohmann::json::parse(buf.str()));
    } catch (const nlohmann::json::exception& e) {
      throw MalformedModelFile(path.string(), e.what());
    } catch (const ScoringError& e) {
      throw MalformedModelFile(path.string(), e.what());
    }
    auto findings = validate_model(model);
    if (has_errors(findings)) throw MalformedModelFile(path.string(), summarize(findings));
    if (snap->models.count(model.model_id))
      throw MalformedModelFile(path.string(), "duplicate model_id " + std::to_string(model.model_id));
    snap->models.emplace(model.model_id, std::move(model));
  }
  return snap;
}

SnapshotPtr upsert_model(const RegistrySnapshot& snapshot_in, ScoringModel model, const fs::path& dir) {
  auto prior = snapshot_in.models.find(model.model_id);
  model.version = prior == snapshot_in.models.end() ? 1 : prior->second.version + 1;
  auto findings = validate_model(model);
  if (has_errors(findings)) throw ValidationRejected(std::move(findings));

  write_file_atomically(model_file_path(dir, model.model_id), model_to_json(model).dump(2) + "\n");

  auto next = std::make_shared<RegistrySnapshot>(snapshot_in);
  next->models.insert_or_assign(model.model_id, std::move(model));
  next->snapshot_version = snapshot_in.snapshot_version + 1;
  return next;
}

SnapshotPtr delete_model(const RegistrySnapshot& snapshot_in, std::int64_t model_id, const fs::path& dir) {
  if (!snapshot_in.models.count(model_id)) throw ModelNotFound(model_id);
  std::error_code ec;
  fs::remove(model_file_path(dir, model_id), ec);
  if (ec) throw IoFailure("cannot delete model file: " + ec.message());
  auto next = std::make_shared<RegistrySnapshot>(snapshot_in);
  next->models.erase(model_id);
  next->snapshot_version = snapshot_in.snapshot_version + 1;
  return next;
}

const ScoringModel& get_model(const RegistrySnapshot& snapshot, std::int64_t model_id) {
  auto it = snapshot.models.find(model_id);
  if (it == snapshot.models.end()) throw ModelNotFound(model_id);
  return it->second;
}

ModelStore::ModelStore(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  current_ = load_registry(dir_);
}

ModelStore::ModelStore(fs::path dir, SnapshotPtr initial) : dir_(std::move(dir)), current_(std::move(initial)) {}

SnapshotPtr ModelStore::snapshot() const {
  std::lock_guard lock(read_mu_);
  return current_;
}

void ModelStore::publish(SnapshotPtr next) {
  std::lock_guard lock(read_mu_);
  current_ = std::move(next);
}

SnapshotPtr ModelStore::upsert(ScoringModel model, std::optional<std::int64_t> base_version) {
  std::lock_guard writer(write_mu_);
  SnapshotPtr base = snapshot();
  if (base_version) {
    auto it = base->models.find(model.model_id);
    const std::int64_t actual = it == base->models.end() ? 0 : it->second.version;
    if (actual != *base_version) throw VersionConflict(model.model_id, *base_version, actual);
  }
  SnapshotPtr next = upsert_model(*base, std::move(model), dir_);
  publish(next);
  return next;
}

SnapshotPtr ModelStore::remove(std::int64_t model_id) {
  std::lock_guard writer(write_mu_);
  SnapshotPtr next = delete_model(*snapshot(), model_id, dir_);
  publish(next);
  return next;
}

}  // namespace scoring
