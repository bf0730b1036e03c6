#include "icolor/session.hpp"

#include <chrono>
#include <fstream>

#include <nlohmann/json.hpp>

#include "icolor/rng.hpp"

namespace icolor {

namespace {

// Rebuild a SegmentationMap from a stored segment-id map plus per-segment
// class info (inverse of what persist() writes).
SegmentationMap segmentation_from_ids(const LabelMap& ids, const std::map<int, int>& class_of,
                                      const std::map<int, std::string>& class_names) {
    SegmentationMap seg;
    seg.height = static_cast<int>(ids.rows());
    seg.width = static_cast<int>(ids.cols());
    seg.segment_ids = ids;
    seg.class_labels = LabelMap::Constant(seg.height, seg.width, -1);
    seg.class_names = class_names;

    std::map<int, Segment> by_id;
    for (int y = 0; y < seg.height; ++y) {
        for (int x = 0; x < seg.width; ++x) {
            const int id = ids(y, x);
            auto [it, fresh] = by_id.try_emplace(id);
            Segment& s = it->second;
            if (fresh) {
                s.id = id;
                auto cit = class_of.find(id);
                s.class_id = cit == class_of.end() ? -1 : cit->second;
                s.bbox = {y, x, y, x};
            }
            s.pixels.push_back(y * seg.width + x);
            s.bbox.y0 = std::min(s.bbox.y0, y);
            s.bbox.x0 = std::min(s.bbox.x0, x);
            s.bbox.y1 = std::max(s.bbox.y1, y);
            s.bbox.x1 = std::max(s.bbox.x1, x);
            if (s.class_id >= 0) seg.class_labels(y, x) = s.class_id;
        }
    }
    for (auto& [id, s] : by_id) seg.segments.push_back(std::move(s));
    return seg;
}

} // namespace

std::string make_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

SessionStore::SessionStore(std::filesystem::path state_root, std::shared_ptr<const ColorizerModel> model)
    : root_(std::move(state_root)), model_(std::move(model)) {
    std::filesystem::create_directories(root_);
}

std::shared_ptr<SessionStore::Entry> SessionStore::entry_for(const std::string& id, bool must_exist) {
    std::lock_guard lock(map_mutex_);
    auto it = entries_.find(id);
    if (it != entries_.end()) return it->second;
    if (!must_exist) {
        auto entry = std::make_shared<Entry>();
        entries_[id] = entry;
        return entry;
    }
    // fall back to disk
    auto session = load_from_disk(id);
    if (!session) throw SessionNotFoundError(id);
    auto entry = std::make_shared<Entry>();
    entry->session = std::move(session);
    entries_[id] = entry;
    return entry;
}

void SessionStore::render_result(Session& s) const {
    const ComposedReference composed = assemble_reference(s.assignment, s.references, s.gray_lum);
    const LabImage lab = rgb_to_lab(s.input);
    s.result = colorize_with_reference(lab.L, composed.image, *model_);
    s.result_png = encode_png(s.result);
}

std::shared_ptr<Session> SessionStore::create(const Bytes& image_bytes, const PipelineParams& params) {
    auto s = std::make_shared<Session>();
    {
        std::lock_guard lock(map_mutex_);
        Rng rng(Rng::combine(static_cast<std::uint64_t>(
                                 std::chrono::steady_clock::now().time_since_epoch().count()),
                             ++id_counter_));
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(rng.next_u64()));
        s->id = buf;
    }
    s->params = params;
    s->created_at = s->updated_at = make_timestamp();
    s->input_png = image_bytes;
    s->input = decode_image(image_bytes);

    const LabImage lab = rgb_to_lab(s->input);
    s->gray_lum = lab.L / 100.0f;
    LabImage gray;
    gray.L = lab.L;
    gray.a = Plane::Zero(s->input.height(), s->input.width());
    gray.b = gray.a;

    s->segmentation = extract_context(gray, params.segmenter);
    ReferenceSet refs = sample_references(s->segmentation, params.n, params.effective_seeds(), params.generator);
    // pin references to their 8-bit PNG form so in-memory and reloaded
    // sessions recolorize bit-identically
    for (int i = 0; i < refs.count(); ++i)
        if (refs.ok[static_cast<size_t>(i)])
            refs.references[static_cast<size_t>(i)] =
                decode_image(encode_png(refs.references[static_cast<size_t>(i)]));
    s->references = std::move(refs);

    s->assignment = assign_segments(s->gray_lum, s->references);
    render_result(*s);
    persist(*s);

    auto entry = entry_for(s->id, false);
    std::lock_guard lock(entry->mutex);
    entry->session = s;
    return s;
}

std::shared_ptr<Session> SessionStore::get(const std::string& id) {
    auto entry = entry_for(id, true);
    std::lock_guard lock(entry->mutex);
    if (!entry->session) throw SessionNotFoundError(id);
    return entry->session;
}

std::vector<std::string> SessionStore::list() const {
    std::vector<std::string> ids;
    if (std::filesystem::is_directory(root_))
        for (const auto& e : std::filesystem::directory_iterator(root_))
            if (e.is_directory() && std::filesystem::exists(e.path() / "meta.json"))
                ids.push_back(e.path().filename().string());
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::shared_ptr<Session> SessionStore::apply_edit(const std::string& id, int segment_id,
                                                  CompositionEdit::Action action, int reference_index,
                                                  int expected_version) {
    auto entry = entry_for(id, true);
    std::lock_guard lock(entry->mutex);
    Session& s = *entry->session;
    if (expected_version != s.version) throw VersionConflictError(s.version, expected_version);

    auto next = std::make_shared<Session>(s);
    next->assignment = edit_assignment(s.assignment, segment_id, action, reference_index);
    next->version = s.version + 1;
    next->updated_at = make_timestamp();
    entry->session = next;
    persist(*next);
    return next;
}

std::shared_ptr<Session> SessionStore::recolorize(const std::string& id) {
    auto entry = entry_for(id, true);
    std::lock_guard lock(entry->mutex);
    auto next = std::make_shared<Session>(*entry->session);
    render_result(*next);
    next->updated_at = make_timestamp();
    entry->session = next;
    persist(*next);
    return next;
}

void SessionStore::persist(const Session& s) const {
    const auto dir = root_ / s.id;
    std::filesystem::create_directories(dir / "refs");
    write_file(dir / "input.png", s.input_png);
    save_label_png(dir / "seg.png", s.segmentation.segment_ids);
    for (int i = 0; i < s.references.count(); ++i)
        if (s.references.ok[static_cast<size_t>(i)])
            save_png(dir / "refs" / ("ref_" + std::to_string(i) + ".png"),
                     s.references.references[static_cast<size_t>(i)]);
    {
        const std::string text = assignment_to_json(s.assignment).dump(2) + "\n";
        write_file(dir / "assignment.json", Bytes(text.begin(), text.end()));
    }
    if (!s.result_png.empty()) write_file(dir / "result.png", s.result_png);

    nlohmann::json meta{{"id", s.id},
                        {"version", s.version},
                        {"created_at", s.created_at},
                        {"updated_at", s.updated_at},
                        {"n", s.params.n},
                        {"seeds", s.params.effective_seeds()},
                        {"segmenter", {{"name", s.params.segmenter.name}, {"options", s.params.segmenter.options}}},
                        {"generator", {{"name", s.params.generator.name}, {"options", s.params.generator.options}}},
                        {"ref_ok", s.references.ok}};
    nlohmann::json class_of = nlohmann::json::object();
    for (const auto& seg : s.segmentation.segments) class_of[std::to_string(seg.id)] = seg.class_id;
    meta["class_of"] = std::move(class_of);
    nlohmann::json names = nlohmann::json::object();
    for (const auto& [cls, name] : s.segmentation.class_names) names[std::to_string(cls)] = name;
    meta["class_names"] = std::move(names);

    const std::string text = meta.dump(2) + "\n";
    write_file(dir / "meta.json", Bytes(text.begin(), text.end()));
}

std::shared_ptr<Session> SessionStore::load_from_disk(const std::string& id) const {
    const auto dir = root_ / id;
    if (!std::filesystem::exists(dir / "meta.json")) return nullptr;

    auto s = std::make_shared<Session>();
    const Bytes meta_bytes = read_file(dir / "meta.json");
    const nlohmann::json meta = nlohmann::json::parse(meta_bytes.begin(), meta_bytes.end());
    s->id = meta.at("id").get<std::string>();
    s->version = meta.at("version").get<int>();
    s->created_at = meta.at("created_at").get<std::string>();
    s->updated_at = meta.at("updated_at").get<std::string>();
    s->params.n = meta.at("n").get<int>();
    s->params.seeds = meta.at("seeds").get<std::vector<std::uint64_t>>();
    s->params.segmenter = {BackendDescriptor::Kind::segmenter,
                           meta.at("segmenter").at("name").get<std::string>(),
                           meta.at("segmenter").at("options").get<std::map<std::string, std::string>>()};
    s->params.generator = {BackendDescriptor::Kind::generator,
                           meta.at("generator").at("name").get<std::string>(),
                           meta.at("generator").at("options").get<std::map<std::string, std::string>>()};

    s->input_png = read_file(dir / "input.png");
    s->input = decode_image(s->input_png);
    s->gray_lum = rgb_to_lab(s->input).L / 100.0f;

    std::map<int, int> class_of;
    for (auto it = meta.at("class_of").begin(); it != meta.at("class_of").end(); ++it)
        class_of[std::stoi(it.key())] = it.value().get<int>();
    std::map<int, std::string> class_names;
    for (auto it = meta.at("class_names").begin(); it != meta.at("class_names").end(); ++it)
        class_names[std::stoi(it.key())] = it.value().get<std::string>();
    s->segmentation = segmentation_from_ids(load_label_png(dir / "seg.png"), class_of, class_names);

    s->references.segmentation = s->segmentation;
    s->references.ok = meta.at("ref_ok").get<std::vector<bool>>();
    const auto seeds = s->params.effective_seeds();
    for (size_t i = 0; i < s->references.ok.size(); ++i) {
        s->references.latents.push_back(make_latent(seeds[i]));
        if (s->references.ok[i])
            s->references.references.push_back(load_image(dir / "refs" / ("ref_" + std::to_string(i) + ".png")));
        else
            s->references.references.emplace_back(RgbImage(s->segmentation.height, s->segmentation.width));
    }

    const Bytes assign_bytes = read_file(dir / "assignment.json");
    s->assignment = assignment_from_json(nlohmann::json::parse(assign_bytes.begin(), assign_bytes.end()));
    if (std::filesystem::exists(dir / "result.png")) {
        s->result_png = read_file(dir / "result.png");
        s->result = decode_image(s->result_png);
    }
    return s;
}

} // namespace icolor
