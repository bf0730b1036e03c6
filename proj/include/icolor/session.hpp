#pragma once

#include <memory>
#include <mutex>
#include <unordered_map>

#include "icolor/imageio.hpp"
#include "icolor/pipeline.hpp"

namespace icolor {

// One interactive-composition workflow: the uploaded input, the cached
// imagination outputs, the current assignment, and the latest result.
// Imagination runs once at creation; edits and recolorize never re-invoke
// the generator backends.
struct Session {
    std::string id;
    int version = 0; // optimistic-concurrency token, bumped per edit
    std::string created_at, updated_at;
    PipelineParams params;

    Bytes input_png; // uploaded bytes, never mutated
    RgbImage input;
    Plane gray_lum;  // input L in [0,1]
    SegmentationMap segmentation;
    ReferenceSet references;
    CompositionAssignment assignment;
    RgbImage result;
    Bytes result_png;
};

class VersionConflictError : public std::runtime_error {
public:
    VersionConflictError(int current, int got)
        : std::runtime_error("version conflict: current " + std::to_string(current) + ", got " +
                             std::to_string(got)),
          current_version(current) {}
    int current_version;
};

class SessionNotFoundError : public std::runtime_error {
public:
    explicit SessionNotFoundError(const std::string& id) : std::runtime_error("no such session: " + id) {}
};

// Sessions live in memory and persist as plain directories under the state
// root (input.png, seg.png, refs/, assignment.json, result.png, meta.json);
// get() falls back to disk so a restarted service keeps serving.
class SessionStore {
public:
    SessionStore(std::filesystem::path state_root, std::shared_ptr<const ColorizerModel> model);

    std::shared_ptr<Session> create(const Bytes& image_bytes, const PipelineParams& params);
    std::shared_ptr<Session> get(const std::string& id);
    std::vector<std::string> list() const;

    // Applies one edit under the version token and bumps the version.
    std::shared_ptr<Session> apply_edit(const std::string& id, int segment_id,
                                        CompositionEdit::Action action, int reference_index,
                                        int expected_version);

    // Re-runs assemble + warp + predict for the current assignment.
    std::shared_ptr<Session> recolorize(const std::string& id);

    const ColorizerModel& model() const { return *model_; }

private:
    struct Entry {
        std::mutex mutex;
        std::shared_ptr<Session> session;
    };

    std::shared_ptr<Entry> entry_for(const std::string& id, bool must_exist);
    void persist(const Session& s) const;
    std::shared_ptr<Session> load_from_disk(const std::string& id) const;
    void render_result(Session& s) const;

    std::filesystem::path root_;
    std::shared_ptr<const ColorizerModel> model_;
    mutable std::mutex map_mutex_;
    std::unordered_map<std::string, std::shared_ptr<Entry>> entries_;
    std::uint64_t id_counter_ = 0;
};

std::string make_timestamp();

} // namespace icolor
