#pragma once

#include <memory>
#include <string>

#include "fmrec/api.hpp"

namespace fmrec::service {

/// cpp-httplib transport for Api. Responses carry permissive CORS headers
/// so a browser front end served elsewhere can call the API.
class HttpServer {
public:
    explicit HttpServer(const Api& api);
    ~HttpServer();

    /// Binds to `port` (0 picks a free one) and returns the bound port, or
    /// -1 on failure.
    int bind(const std::string& host, int port);
    /// Serves until stop(); blocks the calling thread.
    bool listen();
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace fmrec::service
