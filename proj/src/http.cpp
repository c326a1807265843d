#include "fmrec/http.hpp"

#include "httplib.h"

namespace fmrec::service {

struct HttpServer::Impl {
    explicit Impl(const Api& a) : api(a) {}
    const Api& api;
    httplib::Server server;
};

namespace {

void serve(const Api& api, const httplib::Request& in, httplib::Response& out) {
    Request req{in.method, in.path, {}, in.body};
    for (const auto& [k, v] : in.params) req.query.emplace(k, v);
    auto res = api.handle(req);
    out.status = res.status;
    out.set_content(res.body.dump(), "application/json");
}

}  // namespace

HttpServer::HttpServer(const Api& api) : impl_(std::make_unique<Impl>(api)) {
    auto& s = impl_->server;
    s.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Headers", "Content-Type"},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    auto handler = [this](const httplib::Request& in, httplib::Response& out) { serve(impl_->api, in, out); };
    s.Get(".*", handler);
    s.Post(".*", handler);
    s.Put(".*", handler);
    s.Delete(".*", handler);
    s.Options(".*", [](const httplib::Request&, httplib::Response& out) { out.status = 204; });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) return impl_->server.bind_to_any_port(host);
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_->server.is_running()) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace fmrec::service
