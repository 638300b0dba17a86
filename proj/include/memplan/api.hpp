#pragma once

// Stateless HTTP facade. All handlers read immutable state loaded at startup.

#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "memplan/errors.hpp"
#include "memplan/estimators.hpp"
#include "memplan/frontier.hpp"
#include "memplan/measurements.hpp"
#include "memplan/model_spec.hpp"
#include "memplan/planner.hpp"
#include "memplan/render.hpp"
#include "memplan/requests.hpp"

namespace memplan::api {

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    return in;
}

inline ModelCatalog load_catalog_file(const std::string& path) {
    auto in = open_input(path);
    return load_model_catalog(in);
}

inline Dataset load_dataset_file(const std::string& path) {
    auto in = open_input(path);
    return load_measurements(in);
}

inline std::vector<SamplePool> load_pools_file(const std::string& path) {
    auto in = open_input(path);
    return load_pools(in);
}

struct ServiceState {
    ModelCatalog catalog;
    std::map<std::string, Dataset> datasets;
    std::map<std::string, std::vector<SamplePool>> pool_sets;
};

struct Response {
    int status = 200;
    std::string body;
};

inline int http_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_request:
        case ErrorCode::parse_error: return 400;
        case ErrorCode::model_not_found:
        case ErrorCode::key_not_found: return 404;
        case ErrorCode::conflict: return 409;
        case ErrorCode::domain_error:
        case ErrorCode::range_error:
        case ErrorCode::capacity_exceeded:
        case ErrorCode::infeasible: return 422;
        case ErrorCode::io_error: return 500;
    }
    return 500;
}

class Service {
public:
    explicit Service(std::shared_ptr<const ServiceState> state) : state_(std::move(state)) {}

    // Each operation returns the `result` payload of the envelope and throws memplan::Error on failure.

    render::Json models() const { return render::models_json(state_->catalog); }

    render::Json memory(const nlohmann::json& body) const {
        const auto cfg = requests::memory_request(body);
        return render::memory_json(cfg, memory_breakdown(state_->catalog, cfg));
    }

    render::Json frontier(const nlohmann::json& body) const {
        const auto req = requests::frontier_request(body);
        const auto& ds = dataset(req.dataset);
        auto pts = cost_points(ds, state_->catalog, req.unit, req.filter, req.batch);
        if (pts.empty()) throw DomainError("no measurement matches the filters on this cost axis");
        const auto f = pareto_frontier(std::move(pts));
        return render::frontier_json(frontier_composition(f, ds, state_->catalog));
    }

    render::Json plan(const nlohmann::json& body) const {
        const auto doc = requests::plan_request(body);
        const auto& ds = dataset(doc.dataset);
        const auto space = doc.space ? *doc.space : space_from_dataset(ds, doc.request.batch);
        return render::plan_json(memplan::plan(state_->catalog, ds, space, doc.request));
    }

    render::Json estimate(const nlohmann::json& body) const {
        auto doc = requests::estimate_request(body);
        const std::vector<SamplePool>* pools = &doc.pools;
        if (doc.pools.empty()) {
            auto it = state_->pool_sets.find(doc.pool_set);
            if (it == state_->pool_sets.end()) throw KeyNotFound("unknown pool set '" + doc.pool_set + "'");
            pools = &it->second;
        }
        for (const auto& p : *pools)
            if (doc.group > p.size())
                throw DomainError("group size " + std::to_string(doc.group) + " exceeds pool size " +
                                  std::to_string(p.size()) + " of instance " + p.instance_id);
        return render::estimate_json(render::estimate(*pools, doc.group, doc.method, doc.tie));
    }

    /// Transport-independent dispatch.
    Response handle(const std::string& method, const std::string& path, const std::string& body) const {
        try {
            if (method == "GET" && path == "/health") return ok(render::Json{{"status", "ok"}});
            if (method == "GET" && path == "/models") return ok(models());
            if (method != "POST") {
                if (path == "/memory" || path == "/frontier" || path == "/plan" || path == "/estimate")
                    throw InvalidRequest("use POST for " + path);
                return not_found(path);
            }
            nlohmann::json doc;
            try {
                doc = body.empty() ? nlohmann::json::object() : nlohmann::json::parse(body);
            } catch (const nlohmann::json::parse_error& e) {
                throw InvalidRequest(std::string("malformed JSON body: ") + e.what());
            }
            if (path == "/memory") return ok(memory(doc));
            if (path == "/frontier") return ok(frontier(doc));
            if (path == "/plan") return ok(plan(doc));
            if (path == "/estimate") return ok(estimate(doc));
            return not_found(path);
        } catch (const Error& e) {
            return {http_status(e.code()), render::error_envelope(e).dump()};
        } catch (const std::exception& e) {
            return {500, render::error_envelope(Error(ErrorCode::io_error, e.what())).dump()};
        }
    }

    const ServiceState& state() const noexcept { return *state_; }

private:
    const Dataset& dataset(const std::string& name) const {
        if (name.empty()) {
            if (state_->datasets.size() == 1) return state_->datasets.begin()->second;
            throw InvalidRequest("name a 'dataset' (" + std::to_string(state_->datasets.size()) + " loaded)");
        }
        auto it = state_->datasets.find(name);
        if (it == state_->datasets.end()) throw KeyNotFound("unknown dataset '" + name + "'");
        return it->second;
    }

    static Response ok(render::Json result) { return {200, render::ok_envelope(std::move(result)).dump()}; }

    static Response not_found(const std::string& path) {
        return {404, render::error_envelope(KeyNotFound("no endpoint " + path)).dump()};
    }

    std::shared_ptr<const ServiceState> state_;
};

}  // namespace memplan::api
