#pragma once

#include <map>
#include <string>

#include "fmrec/store.hpp"
#include "json.hpp"

namespace fmrec::service {

struct Request {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
};

struct Response {
    int status = 200;
    nlohmann::json body = nlohmann::json::object();
};

/// JSON endpoints under /api/v1, independent of any HTTP transport.
/// Errors come back as {"error": message} with 400 for malformed requests,
/// 404 for unknown ids, 409 for operations on inconsistent or completed
/// sessions and 422 for semantic violations.
class Api {
public:
    explicit Api(Store& store) : store_(store) {}

    Response handle(const Request& req) const;

private:
    Store& store_;
};

}  // namespace fmrec::service
