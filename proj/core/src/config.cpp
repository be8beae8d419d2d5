// SPDX-License-Identifier: Apache-2.0
#include "tokenadapt/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json_io.hpp"
#include "tokenadapt/errors.hpp"

namespace tokenadapt {

using detail::Json;

namespace {

class Section {
public:
    Section(const Json& obj, std::string name) : obj_(obj), name_(std::move(name)) {
        if (!obj_.is_object()) {
            throw ConfigError(name_, "expected an object");
        }
    }

    template <typename T>
    void read(const char* key, T& out) {
        seen_.insert(key);
        auto it = obj_.find(key);
        if (it == obj_.end()) {
            return;
        }
        check_type<T>(*it, key);
        try {
            out = it->template get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(field(key), e.what());
        }
    }

    void reject_unknown() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it) {
            if (!seen_.count(it.key())) {
                throw ConfigError(field(it.key().c_str()), "unknown key");
            }
        }
    }

    std::string field(const char* key) const { return name_ + "." + key; }

private:
    template <typename T>
    void check_type(const Json& v, const char* key) const {
        bool ok = true;
        if constexpr (std::is_same_v<T, bool>) {
            ok = v.is_boolean();
        } else if constexpr (std::is_integral_v<T>) {
            ok = v.is_number_unsigned() || (v.is_number_integer() && v.template get<long long>() >= 0);
            if (!ok) {
                throw ConfigError(field(key), "expected a non-negative integer, got " + v.dump());
            }
        } else if constexpr (std::is_floating_point_v<T>) {
            ok = v.is_number();
        } else {
            ok = v.is_array();
            if (ok) {
                for (const auto& e : v) {
                    if (!(e.is_number_unsigned() || (e.is_number_integer() && e.template get<long long>() >= 0))) {
                        throw ConfigError(field(key), "expected an array of non-negative integers, got " + v.dump());
                    }
                }
            }
        }
        if (!ok) {
            throw ConfigError(field(key), "wrong type: " + std::string(v.type_name()));
        }
    }

    const Json& obj_;
    std::string name_;
    std::set<std::string> seen_;
};

std::size_t line_of(const std::string& text, std::size_t byte) {
    const std::size_t end = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(end), '\n'));
}

template <typename Fn>
void validated(const std::string& where, Fn&& fn) {
    try {
        fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(where, e.what());
    }
}

}  // namespace

void Config::finalize() {
    arch.sparse_layers = prune.sparse_layers;
    scenario.feature_dim = tfm.dim;
    scenario.horizon = planner.horizon;
    validated("arch", [&] { arch.validate(); });
    validated("prune", [&] {
        prune.validate();
        for (std::size_t s : prune.sparse_layers) {
            if (s >= arch.num_layers) {
                throw PreconditionError("sparse layer " + std::to_string(s) + " outside " +
                                        std::to_string(arch.num_layers) + " layers");
            }
        }
    });
    validated("tfm", [&] { tfm.as_arch().validate(); });
    validated("planner", [&] { planner.validate(); });
    validated("scenario", [&] { scenario.validate(); });
    if (init.stddev < 0.0) {
        throw ConfigError("arch.init_stddev", "must be non-negative");
    }
}

Config default_config() {
    Config c;
    c.finalize();
    return c;
}

Config parse_config(const std::string& text, const std::string& source) {
    Json root;
    try {
        root = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(source + ":" + std::to_string(line_of(text, e.byte)), e.what());
    }
    if (!root.is_object()) {
        throw ConfigError(source, "top level must be an object");
    }
    static const std::set<std::string> kSections = {"arch", "prune", "tfm", "planner", "scenario", "bench"};
    for (auto it = root.begin(); it != root.end(); ++it) {
        if (!kSections.count(it.key())) {
            throw ConfigError(it.key(), "unknown section");
        }
    }
    const Json empty = Json::object();
    auto section = [&](const char* name) { return Section(root.contains(name) ? root[name] : empty, name); };

    Config c;
    {
        Section s = section("arch");
        s.read("num_layers", c.arch.num_layers);
        s.read("d_model", c.arch.d_model);
        s.read("num_heads", c.arch.num_heads);
        s.read("head_dim", c.arch.head_dim);
        s.read("ffn_dim", c.arch.ffn_dim);
        s.read("rope_theta", c.arch.rope_theta);
        s.read("weight_seed", c.weight_seed);
        s.read("init_stddev", c.init.stddev);
        s.read("qk_identity_gain", c.init.qk_identity_gain);
        s.reject_unknown();
    }
    {
        Section s = section("prune");
        s.read("pruning_rate", c.prune.pruning_rate);
        s.read("recycle_fraction", c.prune.recycle_fraction);
        s.read("sparse_layers", c.prune.sparse_layers);
        s.reject_unknown();
    }
    {
        Section s = section("tfm");
        s.read("dim", c.tfm.dim);
        s.read("num_heads", c.tfm.num_heads);
        s.read("ffn_dim", c.tfm.ffn_dim);
        s.read("num_layers", c.tfm.num_layers);
        s.reject_unknown();
    }
    {
        Section s = section("planner");
        s.read("horizon", c.planner.horizon);
        s.read("query_dim", c.planner.query_dim);
        s.read("num_heads", c.planner.num_heads);
        s.read("ffn_dim", c.planner.ffn_dim);
        s.read("num_layers", c.planner.num_layers);
        s.read("lambda_lateral", c.planner.loss.lateral);
        s.read("lambda_velocity", c.planner.loss.velocity);
        s.read("lambda_endpoint", c.planner.loss.endpoint);
        s.reject_unknown();
    }
    {
        Section s = section("scenario");
        s.read("views", c.scenario.views);
        s.read("tokens_per_view", c.scenario.tokens_per_view);
        s.read("history_frames", c.scenario.history_frames);
        s.read("text_tokens", c.scenario.text_tokens);
        s.read("anchor_text_tokens", c.scenario.anchor_text_tokens);
        s.read("planted_per_view", c.scenario.planted_per_view);
        s.read("alignment_strength", c.scenario.alignment_strength);
        s.read("noise_scale", c.scenario.noise_scale);
        s.read("temporal_noise", c.scenario.temporal_noise);
        s.read("text_noise", c.scenario.text_noise);
        s.read("modality_gap", c.scenario.modality_gap);
        s.read("separators", c.scenario.separators);
        s.reject_unknown();
    }
    {
        Section s = section("bench");
        s.read("seeds", c.bench.seeds);
        s.read("base_seed", c.bench.base_seed);
        s.read("threads", c.bench.threads);
        s.read("render_masks", c.bench.render_masks);
        s.reject_unknown();
    }
    c.finalize();
    return c;
}

Config load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(path, "cannot open file");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

namespace detail {

Json config_json(const Config& c) {
    Json j;
    j["arch"] = {{"num_layers", c.arch.num_layers},
                 {"d_model", c.arch.d_model},
                 {"num_heads", c.arch.num_heads},
                 {"head_dim", c.arch.head_dim},
                 {"ffn_dim", c.arch.ffn_dim},
                 {"rope_theta", c.arch.rope_theta},
                 {"weight_seed", c.weight_seed},
                 {"init_stddev", c.init.stddev},
                 {"qk_identity_gain", c.init.qk_identity_gain}};
    j["prune"] = {{"pruning_rate", c.prune.pruning_rate},
                  {"recycle_fraction", c.prune.recycle_fraction},
                  {"sparse_layers", c.prune.sparse_layers}};
    j["tfm"] = {{"dim", c.tfm.dim}, {"num_heads", c.tfm.num_heads}, {"ffn_dim", c.tfm.ffn_dim},
                {"num_layers", c.tfm.num_layers}};
    j["planner"] = {{"horizon", c.planner.horizon},
                    {"query_dim", c.planner.query_dim},
                    {"num_heads", c.planner.num_heads},
                    {"ffn_dim", c.planner.ffn_dim},
                    {"num_layers", c.planner.num_layers},
                    {"lambda_lateral", c.planner.loss.lateral},
                    {"lambda_velocity", c.planner.loss.velocity},
                    {"lambda_endpoint", c.planner.loss.endpoint}};
    j["scenario"] = {{"views", c.scenario.views},
                     {"tokens_per_view", c.scenario.tokens_per_view},
                     {"history_frames", c.scenario.history_frames},
                     {"text_tokens", c.scenario.text_tokens},
                     {"anchor_text_tokens", c.scenario.anchor_text_tokens},
                     {"planted_per_view", c.scenario.planted_per_view},
                     {"alignment_strength", c.scenario.alignment_strength},
                     {"noise_scale", c.scenario.noise_scale},
                     {"temporal_noise", c.scenario.temporal_noise},
                     {"text_noise", c.scenario.text_noise},
                     {"modality_gap", c.scenario.modality_gap},
                     {"separators", c.scenario.separators}};
    j["bench"] = {{"seeds", c.bench.seeds},
                  {"base_seed", c.bench.base_seed},
                  {"threads", c.bench.threads},
                  {"render_masks", c.bench.render_masks}};
    return j;
}

Json decision_json(const PruneDecision& d) {
    Json j;
    j["budget"] = d.budget;
    j["top_k"] = d.top_k;
    j["recycle_k"] = d.recycle_k;
    j["global"] = d.global;
    j["recycle"] = d.recycle;
    j["final"] = d.final;
    j["anchors"] = d.anchors;
    j["anchor_threshold"] = d.anchor_threshold;
    j["importance"] = d.importance;
    j["candidates"] = d.candidates;
    j["diversity"] = d.diversity;
    return j;
}

Json flops_json(const FlopsReport& r) {
    Json layers = Json::array();
    for (const auto& l : r.layers) {
        layers.push_back({{"layer", l.layer},
                          {"length", l.length},
                          {"visual", l.visual},
                          {"sparse", l.sparse},
                          {"projection_flops", l.projection_flops},
                          {"attention_flops", l.attention_flops},
                          {"ffn_flops", l.ffn_flops},
                          {"elementwise_flops", l.elementwise_flops},
                          {"eager_overhead_flops", l.eager_overhead_flops}});
    }
    Json j;
    j["total_flops"] = r.total_flops;
    j["llm_flops"] = r.llm_flops;
    j["eager_overhead_flops"] = r.eager_overhead_flops;
    j["frontend_flops"] = r.frontend_flops;
    j["frontend_analytic_flops"] = r.frontend_analytic_flops;
    j["frontend_residual_flops"] = r.frontend_flops - r.frontend_analytic_flops;
    j["tfm_flops"] = r.tfm_flops;
    j["adapter_flops"] = r.adapter_flops;
    j["attention_flops"] = r.attention_flops();
    j["ffn_flops"] = r.ffn_flops();
    j["layers"] = std::move(layers);
    return j;
}

}  // namespace detail

std::string config_to_json(const Config& cfg, int indent) { return detail::config_json(cfg).dump(indent); }

}  // namespace tokenadapt
