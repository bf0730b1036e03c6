#include "icolor/service.hpp"

#include <httplib.h>

#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "icolor/imageops.hpp"

namespace icolor {

namespace {

nlohmann::json error_json(const std::string& code, const std::string& stage, const std::string& message) {
    return {{"code", code}, {"stage", stage}, {"message", message}};
}

void send_json(httplib::Response& res, int status, const nlohmann::json& j) {
    res.status = status;
    res.set_content(j.dump(2) + "\n", "application/json");
}

void send_png(httplib::Response& res, const Bytes& bytes) {
    res.status = 200;
    res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
}

nlohmann::json session_view(const Session& s) {
    const std::string base = "/api/sessions/" + s.id;
    int excluded = 0;
    for (const auto& [id, idx] : s.assignment.beta) excluded += idx == kExcluded ? 1 : 0;
    return {{"id", s.id},
            {"version", s.version},
            {"created_at", s.created_at},
            {"updated_at", s.updated_at},
            {"n", s.params.n},
            {"seeds", s.params.effective_seeds()},
            {"segment_count", s.segmentation.segments.size()},
            {"excluded_count", excluded},
            {"edit_count", s.assignment.edit_log.size()},
            {"urls",
             {{"input", base + "/input.png"},
              {"result", base + "/result.png"},
              {"segmentation", base + "/seg.png"},
              {"segments", base + "/segments"}}}};
}

nlohmann::json segments_view(const Session& s) {
    const std::string base = "/api/sessions/" + s.id;
    nlohmann::json out = nlohmann::json::array();
    for (const auto& seg : s.segmentation.segments) {
        nlohmann::json candidates = nlohmann::json::array();
        for (int i = 0; i < s.references.count(); ++i) {
            if (!s.references.ok[static_cast<size_t>(i)]) continue;
            candidates.push_back(base + "/segments/" + std::to_string(seg.id) + "/candidates/" +
                                 std::to_string(i) + ".png");
        }
        nlohmann::json scores = nlohmann::json::array();
        for (double v : s.assignment.scores.at(seg.id)) {
            if (std::isfinite(v)) scores.push_back(v);
            else scores.push_back(nullptr);
        }
        out.push_back({{"id", seg.id},
                       {"class_id", seg.class_id},
                       {"class_name", s.segmentation.class_name(seg.class_id)},
                       {"bbox", {seg.bbox.y0, seg.bbox.x0, seg.bbox.y1, seg.bbox.x1}},
                       {"pixel_count", seg.pixels.size()},
                       {"beta", s.assignment.beta.at(seg.id)},
                       {"scores", std::move(scores)},
                       {"candidates", std::move(candidates)}});
    }
    return out;
}

CompositionEdit::Action parse_action(const std::string& name) {
    if (name == "exclude") return CompositionEdit::Action::exclude;
    if (name == "set_reference") return CompositionEdit::Action::set_reference;
    if (name == "reset") return CompositionEdit::Action::reset;
    throw std::invalid_argument("unknown edit action: " + name);
}

template <class F>
void guarded(httplib::Response& res, F&& f) {
    try {
        f();
    } catch (const SessionNotFoundError& e) {
        send_json(res, 404, error_json("not_found", "session", e.what()));
    } catch (const VersionConflictError& e) {
        nlohmann::json j = error_json("version_conflict", "session", e.what());
        j["current_version"] = e.current_version;
        send_json(res, 409, j);
    } catch (const PipelineError& e) {
        send_json(res, e.code() == "bad_request" ? 400 : 500, error_json(e.code(), stage_name(e.stage()), e.what()));
    } catch (const BackendError& e) {
        send_json(res, 500, error_json("backend_error", "generation", e.what()));
    } catch (const std::invalid_argument& e) {
        send_json(res, 400, error_json("bad_request", "session", e.what()));
    } catch (const std::out_of_range& e) {
        send_json(res, 400, error_json("bad_request", "session", e.what()));
    } catch (const std::exception& e) {
        send_json(res, 500, error_json("internal", "session", e.what()));
    }
}

} // namespace

PipelineService::PipelineService(std::filesystem::path state_dir, std::shared_ptr<const ColorizerModel> model,
                                 PipelineParams default_params)
    : store_(std::move(state_dir), std::move(model)), defaults_(std::move(default_params)) {}

void PipelineService::register_routes(httplib::Server& server) {
    server.Post("/api/sessions", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            if (!req.has_file("image"))
                throw std::invalid_argument("multipart field 'image' is required");
            const auto file = req.get_file_value("image");
            Bytes bytes(file.content.begin(), file.content.end());

            PipelineParams params = defaults_;
            if (req.has_file("n")) params.n = std::stoi(req.get_file_value("n").content);
            if (req.has_file("seeds")) {
                params.seeds.clear();
                std::stringstream ss(req.get_file_value("seeds").content);
                std::string item;
                while (std::getline(ss, item, ',')) params.seeds.push_back(std::stoull(item));
            }
            if (req.has_file("backend")) {
                const std::string name = req.get_file_value("backend").content;
                params.segmenter.name = name;
                params.generator.name = name;
            }
            if (!params.seeds.empty() && static_cast<int>(params.seeds.size()) != params.n)
                throw std::invalid_argument("seeds length must equal n");

            auto session = store_.create(bytes, params);
            send_json(res, 200, session_view(*session));
        });
    });

    server.Get("/api/sessions", [this](const httplib::Request&, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 200, nlohmann::json{{"sessions", store_.list()}}); });
    });

    server.Get(R"(/api/sessions/([0-9a-f]+))", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 200, session_view(*store_.get(req.matches[1]))); });
    });

    server.Get(R"(/api/sessions/([0-9a-f]+)/segments)",
               [this](const httplib::Request& req, httplib::Response& res) {
                   guarded(res, [&] { send_json(res, 200, segments_view(*store_.get(req.matches[1]))); });
               });

    server.Post(R"(/api/sessions/([0-9a-f]+)/edits)",
                [this](const httplib::Request& req, httplib::Response& res) {
                    guarded(res, [&] {
                        const nlohmann::json body = nlohmann::json::parse(req.body);
                        const auto session = store_.apply_edit(
                            req.matches[1], body.at("segment_id").get<int>(),
                            parse_action(body.at("action").get<std::string>()),
                            body.value("reference_index", -1), body.at("version").get<int>());
                        send_json(res, 200, session_view(*session));
                    });
                });

    server.Post(R"(/api/sessions/([0-9a-f]+)/recolorize)",
                [this](const httplib::Request& req, httplib::Response& res) {
                    guarded(res, [&] { send_json(res, 200, session_view(*store_.recolorize(req.matches[1]))); });
                });

    server.Get(R"(/api/sessions/([0-9a-f]+)/result.png)",
               [this](const httplib::Request& req, httplib::Response& res) {
                   guarded(res, [&] { send_png(res, store_.get(req.matches[1])->result_png); });
               });

    server.Get(R"(/api/sessions/([0-9a-f]+)/input.png)",
               [this](const httplib::Request& req, httplib::Response& res) {
                   guarded(res, [&] { send_png(res, store_.get(req.matches[1])->input_png); });
               });

    server.Get(R"(/api/sessions/([0-9a-f]+)/seg.png)",
               [this](const httplib::Request& req, httplib::Response& res) {
                   guarded(res, [&] {
                       send_png(res, encode_label_png(store_.get(req.matches[1])->segmentation.segment_ids));
                   });
               });

    server.Get(R"(/api/sessions/([0-9a-f]+)/refs/(\d+).png)",
               [this](const httplib::Request& req, httplib::Response& res) {
                   guarded(res, [&] {
                       const auto session = store_.get(req.matches[1]);
                       const int i = std::stoi(req.matches[2]);
                       if (i < 0 || i >= session->references.count() || !session->references.ok[i])
                           throw SessionNotFoundError("reference " + std::to_string(i));
                       send_png(res, encode_png(session->references.references[i]));
                   });
               });

    // server-rendered candidate thumbnail: reference i cropped to segment j's bbox
    server.Get(R"(/api/sessions/([0-9a-f]+)/segments/(\d+)/candidates/(\d+).png)",
               [this](const httplib::Request& req, httplib::Response& res) {
                   guarded(res, [&] {
                       const auto session = store_.get(req.matches[1]);
                       const int seg_id = std::stoi(req.matches[2]);
                       const int i = std::stoi(req.matches[3]);
                       const Segment* seg = session->segmentation.find(seg_id);
                       if (!seg) throw SessionNotFoundError("segment " + std::to_string(seg_id));
                       if (i < 0 || i >= session->references.count() || !session->references.ok[i])
                           throw SessionNotFoundError("reference " + std::to_string(i));
                       const auto& box = seg->bbox;
                       const RgbImage thumb = crop(session->references.references[i], box.y0, box.x0,
                                                   box.y1 - box.y0 + 1, box.x1 - box.x0 + 1);
                       send_png(res, encode_png(thumb));
                   });
               });
}

int serve(const std::filesystem::path& state_dir, std::shared_ptr<const ColorizerModel> model,
          const std::string& host, int port, PipelineParams default_params) {
    PipelineService service(state_dir, std::move(model), std::move(default_params));
    httplib::Server server;
    service.register_routes(server);
    std::printf("listening on %s:%d, state in %s\n", host.c_str(), port, state_dir.string().c_str());
    return server.listen(host, port) ? 0 : 1;
}

} // namespace icolor
