#pragma once

#include "icolor/session.hpp"

namespace httplib {
class Server;
}

namespace icolor {

// HTTP/JSON session API consumed by the browser composer. All images travel
// as PNG; errors are {code, stage, message}.
class PipelineService {
public:
    PipelineService(std::filesystem::path state_dir, std::shared_ptr<const ColorizerModel> model,
                    PipelineParams default_params = {});

    void register_routes(httplib::Server& server);
    SessionStore& store() { return store_; }

private:
    SessionStore store_;
    PipelineParams defaults_;
};

// Blocking listen loop with routes registered.
int serve(const std::filesystem::path& state_dir, std::shared_ptr<const ColorizerModel> model,
          const std::string& host, int port, PipelineParams default_params = {});

} // namespace icolor
