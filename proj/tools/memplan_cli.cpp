// memplan: memory footprints, frontiers, plans and maj@G estimates from the command line.
//
// Exit codes: 0 success, 1 domain error, 2 usage error.
// Errors print one line to stderr: "error[CODE]: message".

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <pthread.h>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "memplan/http_server.hpp"
#include "memplan/memplan.hpp"

#ifndef MEMPLAN_DEFAULT_SPEC
#define MEMPLAN_DEFAULT_SPEC "data/models/qwen3.json"
#endif

namespace {

using namespace memplan;

enum class Format { text, machine };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string one_line(std::string s) {
    for (auto& c : s)
        if (c == '\n' || c == '\r') c = ' ';
    return s;
}

std::string resolve_spec_path(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("MEMPLAN_SPEC"); env && *env) return env;
    return MEMPLAN_DEFAULT_SPEC;
}

void emit(Format format, const render::Json& result, const std::string& text) {
    if (format == Format::machine)
        std::cout << render::ok_envelope(result).dump() << '\n';
    else
        std::cout << text;
}

double parse_budget_arg(const std::string& s) {
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(s, &used);
    } catch (const std::exception&) {
        throw UsageError("budget '" + s + "' is not a number");
    }
    const std::string suffix = s.substr(used);
    if (suffix.empty() || suffix == "B") return value;
    if (suffix == "KiB") return value * 1024.0;
    if (suffix == "MiB") return value * 1024.0 * 1024.0;
    if (suffix == "GiB") return value * static_cast<double>(kGiB);
    if (suffix == "s") return value;
    throw UsageError("budget suffix '" + suffix + "' not understood (use B, KiB, MiB, GiB or s)");
}

std::pair<std::string, std::string> split_named(const std::string& arg) {
    const auto eq = arg.find('=');
    if (eq == std::string::npos) return {"default", arg};
    return {arg.substr(0, eq), arg.substr(eq + 1)};
}

struct KvFlags {
    std::string kind = "full";
    token_count retain = 4096;
    std::uint32_t bits = 4;
    std::uint32_t group = 64;
    std::uint32_t scale = 16;
    std::uint32_t zero = 0;
    token_count residual = 128;

    KvCacheStrategy strategy() const {
        if (kind == "full") return FullKv{};
        if (kind == "evict") return EvictKv{retain};
        if (kind == "quant") return QuantKv{bits, group, scale, zero, residual};
        throw UsageError("--kv must be full, evict or quant");
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"memplan: memory planning for reasoning-model deployment"};
    app.require_subcommand(1);

    std::string format_name = "text";
    std::string spec_flag;
    app.add_option("--format", format_name, "Output format")->check(CLI::IsMember({"text", "machine"}));
    app.add_option("--spec", spec_flag, "Model spec file (default: $MEMPLAN_SPEC or the shipped Qwen3 fixture)");

    // memory
    auto* memory_cmd = app.add_subcommand("memory", "Weight, KV, total and amortized memory for one configuration");
    std::string model;
    std::uint32_t wbits = 16, wgroup = 128, wscale = 16, wzero = 0;
    token_count tokens = 0;
    std::uint32_t group = 1, batch = 1;
    KvFlags kv;
    memory_cmd->add_option("--model", model, "Model name")->required();
    memory_cmd->add_option("--wbits", wbits, "Weight precision (4, 8, 16)");
    memory_cmd->add_option("--wgroup", wgroup, "Weight quantization group size");
    memory_cmd->add_option("--wscale", wscale, "Weight scale bits");
    memory_cmd->add_option("--wzero", wzero, "Weight zero-point bits");
    memory_cmd->add_option("--tokens,-T", tokens, "Cached tokens per generation")->required();
    memory_cmd->add_option("--samples,-G", group, "Sampling group size G");
    memory_cmd->add_option("--batch,-B", batch, "Theoretical batch for weight amortization");
    memory_cmd->add_option("--kv", kv.kind, "KV strategy: full, evict, quant");
    memory_cmd->add_option("--kv-retain", kv.retain, "Eviction: retained tokens");
    memory_cmd->add_option("--kv-bits", kv.bits, "Quantization: KV precision (2, 4, 8)");
    memory_cmd->add_option("--kv-group", kv.group, "Quantization: group size");
    memory_cmd->add_option("--kv-scale", kv.scale, "Quantization: scale bits");
    memory_cmd->add_option("--kv-zero", kv.zero, "Quantization: zero-point bits");
    memory_cmd->add_option("--kv-residual", kv.residual, "Quantization: full-precision residual tokens");

    // frontier
    auto* frontier_cmd = app.add_subcommand("frontier", "Pareto frontier of a measurement file");
    std::string dataset_path, unit_name_flag = "bytes";
    std::optional<std::string> f_model, f_kv;
    std::optional<std::uint32_t> f_bits, f_group;
    std::uint32_t f_batch = 1;
    frontier_cmd->add_option("--dataset", dataset_path, "Measurement file")->required();
    frontier_cmd->add_option("--unit", unit_name_flag, "Cost axis: bytes|memory, seconds|latency, inverse_rps|throughput");
    frontier_cmd->add_option("--batch,-B", f_batch, "Amortize weights over B generations (memory axis)");
    frontier_cmd->add_option("--model", f_model, "Keep one model");
    frontier_cmd->add_option("--wbits", f_bits, "Keep one weight precision");
    frontier_cmd->add_option("--kv-kind", f_kv, "Keep one KV strategy kind");
    frontier_cmd->add_option("--group", f_group, "Keep one group size");

    // plan
    auto* plan_cmd = app.add_subcommand("plan", "Best measured configuration under a budget");
    std::string budget_arg, plan_dataset, objective = "memory", task = "unknown", space_path;
    std::uint32_t plan_batch = 1;
    bool no_annotate = false;
    plan_cmd->add_option("--budget", budget_arg, "Budget: bytes (suffix B/KiB/MiB/GiB), seconds, or inf")->required();
    plan_cmd->add_option("--dataset", plan_dataset, "Measurement file")->required();
    plan_cmd->add_option("--objective", objective, "memory or latency")->check(CLI::IsMember({"memory", "latency"}));
    plan_cmd->add_option("--batch,-B", plan_batch, "Theoretical batch (amortized memory when > 1)");
    plan_cmd->add_option("--task", task, "Task type for precision guidance")
        ->check(CLI::IsMember({"unknown", "math", "knowledge"}));
    plan_cmd->add_option("--space", space_path, "Config space document (default: the dataset's own axes)");
    plan_cmd->add_flag("--no-annotate", no_annotate, "Skip finding annotations");

    // estimate
    auto* estimate_cmd = app.add_subcommand("estimate", "maj@G over a sample-pool file");
    std::string pools_path, method = "exact", tie = "uniform";
    std::uint32_t est_group = 1;
    std::uint64_t resamples = 100000;
    std::optional<std::uint64_t> seed;
    estimate_cmd->add_option("--pools", pools_path, "Sample-pool file")->required();
    estimate_cmd->add_option("--group,-G", est_group, "Group size G")->required();
    estimate_cmd->add_option("--method", method, "exact or monte-carlo")
        ->check(CLI::IsMember({"exact", "monte-carlo", "monte_carlo"}));
    estimate_cmd->add_option("--resamples", resamples, "Monte-carlo resamples");
    estimate_cmd->add_option("--seed", seed, "Monte-carlo seed (required for monte-carlo)");
    estimate_cmd->add_option("--tie", tie, "Tie policy")
        ->check(CLI::IsMember({"uniform", "first_sampled", "count_as_wrong"}));

    // serve
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
    std::string bind = "127.0.0.1:8080";
    std::vector<std::string> serve_datasets, serve_pools;
    bool cors = false;
    serve_cmd->add_option("--bind", bind, "host:port");
    serve_cmd->add_option("--dataset", serve_datasets, "name=path of a measurement file (repeatable)");
    serve_cmd->add_option("--pools", serve_pools, "name=path of a sample-pool file (repeatable)");
    serve_cmd->add_flag("--cors", cors, "Permissive cross-origin headers for local UI development");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error[USAGE]: " << one_line(e.what()) << '\n';
        return 2;
    }

    const Format format = format_name == "machine" ? Format::machine : Format::text;

    try {
        if (*memory_cmd) {
            const auto catalog = api::load_catalog_file(resolve_spec_path(spec_flag));
            InferenceConfig cfg;
            cfg.model = model;
            cfg.weight_quant = WeightQuantSpec{wbits, wgroup, wscale, wzero};
            cfg.kv = kv.strategy();
            cfg.tokens = tokens;
            cfg.group = group;
            cfg.batch = batch;
            const auto m = memory_breakdown(catalog, cfg);
            emit(format, render::memory_json(cfg, m), render::memory_text(cfg, m));
        } else if (*frontier_cmd) {
            const auto catalog = api::load_catalog_file(resolve_spec_path(spec_flag));
            const auto ds = api::load_dataset_file(dataset_path);
            PointFilter filter{f_model, f_bits, f_kv, f_group};
            CostUnit unit;
            try {
                unit = parse_unit(unit_name_flag);
            } catch (const InvalidRequest& e) {
                throw UsageError(e.what());
            }
            auto pts = cost_points(ds, catalog, unit, filter, f_batch);
            if (pts.empty()) throw DomainError("no measurement matches the filters on this cost axis");
            const auto rows = frontier_composition(pareto_frontier(std::move(pts)), ds, catalog);
            emit(format, render::frontier_json(rows), render::frontier_text(rows));
        } else if (*plan_cmd) {
            const auto catalog = api::load_catalog_file(resolve_spec_path(spec_flag));
            const auto ds = api::load_dataset_file(plan_dataset);
            PlanRequest req;
            req.budget = parse_budget_arg(budget_arg);
            req.objective = parse_objective(objective);
            req.batch = plan_batch;
            req.task = parse_task(task);
            req.annotate = !no_annotate;
            ConfigSpace space;
            if (!space_path.empty()) {
                auto in = api::open_input(space_path);
                nlohmann::json doc;
                try {
                    doc = nlohmann::json::parse(in);
                } catch (const nlohmann::json::parse_error& e) {
                    throw ParseError(0, "", std::string("malformed space document: ") + e.what());
                }
                space = requests::space_request(doc);
            } else {
                space = space_from_dataset(ds, plan_batch);
            }
            const auto rec = plan(catalog, ds, space, req);
            emit(format, render::plan_json(rec), render::plan_text(rec));
        } else if (*estimate_cmd) {
            const auto pools = api::load_pools_file(pools_path);
            if (pools.empty()) throw DomainError("pool file holds no instances");
            if (est_group == 0) throw UsageError("--group must be >= 1");
            for (const auto& p : pools)
                if (est_group > p.size())
                    throw UsageError("--group " + std::to_string(est_group) + " exceeds pool size " +
                                     std::to_string(p.size()) + " of instance " + p.instance_id);
            EstimateMethod m = ExactMethod{};
            if (method != "exact") {
                if (!seed) throw UsageError("monte-carlo requires --seed");
                m = MonteCarloMethod{resamples, *seed};
            }
            const auto rep = render::estimate(pools, est_group, m, render::parse_tie(tie));
            emit(format, render::estimate_json(rep), render::estimate_text(rep));
        } else if (*serve_cmd) {
            std::map<std::string, std::string> datasets, pool_sets;
            for (const auto& d : serve_datasets) datasets.insert(split_named(d));
            for (const auto& p : serve_pools) pool_sets.insert(split_named(p));
            const auto colon = bind.rfind(':');
            if (colon == std::string::npos) throw UsageError("--bind must be host:port");
            const std::string host = bind.substr(0, colon);
            int port = 0;
            try {
                port = std::stoi(bind.substr(colon + 1));
            } catch (const std::exception&) {
                throw UsageError("--bind port is not a number");
            }

            // Block termination signals before any thread starts; a waiter thread stops the server.
            sigset_t signals;
            sigemptyset(&signals);
            sigaddset(&signals, SIGINT);
            sigaddset(&signals, SIGTERM);
            pthread_sigmask(SIG_BLOCK, &signals, nullptr);

            const api::Service service(api::load_state(resolve_spec_path(spec_flag), datasets, pool_sets));
            httplib::Server server;
            api::bind_routes(server, service, cors);
            // httplib's default adds SO_REUSEPORT, which lets a second server share a busy port
            server.set_socket_options([](socket_t sock) {
                int yes = 1;
                setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
            });
            if (!server.bind_to_port(host, port)) throw IoError("cannot bind " + bind);
            std::cerr << "listening on " << bind << '\n';

            std::thread waiter([&] {
                int sig = 0;
                sigwait(&signals, &sig);
                server.stop();
            });
            server.listen_after_bind();
            // listen returned on its own (not via a signal): wake the waiter
            pthread_kill(waiter.native_handle(), SIGTERM);
            waiter.join();
        }
    } catch (const UsageError& e) {
        std::cerr << "error[USAGE]: " << one_line(e.what()) << '\n';
        return 2;
    } catch (const InvalidRequest& e) {
        std::cerr << "error[USAGE]: " << one_line(e.what()) << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "error[" << code_name(e.code()) << "]: " << one_line(e.what()) << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error[INTERNAL]: " << one_line(e.what()) << '\n';
        return 1;
    }
    return 0;
}
