#pragma once

#include <fstream>
#include <map>
#include <memory>
#include <string>

#include <httplib.h>

#include "memplan/api.hpp"

namespace memplan::api {

/// Loads everything a service needs; throws on any malformed input so a bad
/// file stops startup.
inline std::shared_ptr<const ServiceState> load_state(const std::string& spec_path,
                                                      const std::map<std::string, std::string>& datasets,
                                                      const std::map<std::string, std::string>& pool_sets) {
    auto state = std::make_shared<ServiceState>();
    state->catalog = load_catalog_file(spec_path);
    for (const auto& [name, path] : datasets) state->datasets.emplace(name, load_dataset_file(path));
    for (const auto& [name, path] : pool_sets) state->pool_sets.emplace(name, load_pools_file(path));
    return state;
}

/// Registers every endpoint on `server`. The service must outlive the server.
inline void bind_routes(httplib::Server& server, const Service& service, bool permissive_cors) {
    auto reply = [&service, permissive_cors](const httplib::Request& req, httplib::Response& res) {
        const auto out = service.handle(req.method, req.path, req.body);
        res.status = out.status;
        if (permissive_cors) res.set_header("Access-Control-Allow-Origin", "*");
        res.set_content(out.body, "application/json");
    };
    for (const char* path : {"/health", "/models"}) server.Get(path, reply);
    for (const char* path : {"/memory", "/frontier", "/plan", "/estimate"}) server.Post(path, reply);
    if (permissive_cors) {
        server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
            res.set_header("Access-Control-Allow-Origin", "*");
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
            res.status = 204;
        });
    }
}

}  // namespace memplan::api
