#include "pimbs/experiment_config.hpp"

#include "pimbs/errors.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace pimbs {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& known,
                    const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!known.count(it.key()))
            throw ConfigError("unknown key \"" + it.key() + "\" in " + where);
}

double need_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where + " must be a number");
    return v.get<double>();
}

int need_int(const json& v, const std::string& where, int lo) {
    if (!v.is_number_integer()) throw ConfigError(where + " must be an integer");
    const auto x = v.get<long long>();
    if (x < lo) throw ConfigError(where + " must be >= " + std::to_string(lo));
    return static_cast<int>(x);
}

std::array<double, 2> need_pair(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 2) throw ConfigError(where + " must be a 2-element array");
    return {need_number(v[0], where), need_number(v[1], where)};
}

Point2 need_point(const json& v, const std::string& where) {
    const auto p = need_pair(v, where);
    return {p[0], p[1]};
}

void parse_model(const json& j, ArmModel& model) {
    reject_unknown(j, {"link_lengths", "link_masses", "com_offsets", "gravity", "elastic_k",
                       "muscles"},
                   "model");
    if (j.contains("link_lengths")) model.link_lengths = need_pair(j["link_lengths"], "model.link_lengths");
    if (j.contains("link_masses")) model.link_masses = need_pair(j["link_masses"], "model.link_masses");
    if (j.contains("com_offsets")) model.com_offsets = need_pair(j["com_offsets"], "model.com_offsets");
    if (j.contains("gravity")) model.gravity = need_number(j["gravity"], "model.gravity");
    if (j.contains("elastic_k")) model.elastic_k = need_number(j["elastic_k"], "model.elastic_k");
    if (j.contains("muscles")) {
        const json& ms = j["muscles"];
        if (!ms.is_array() || ms.empty()) throw ConfigError("model.muscles must be a nonempty array");
        model.muscles.clear();
        for (const json& mj : ms) {
            reject_unknown(mj, {"from_body", "from_point", "to_body", "to_point"},
                           "model.muscles[]");
            MusclePath mp;
            try {
                mp.from_body = body_from_name(mj.at("from_body").get<std::string>());
                mp.to_body = body_from_name(mj.at("to_body").get<std::string>());
            } catch (const std::exception& e) {
                throw ConfigError(std::string("model.muscles[]: ") + e.what());
            }
            mp.from_point = need_point(mj.at("from_point"), "model.muscles[].from_point");
            mp.to_point = need_point(mj.at("to_point"), "model.muscles[].to_point");
            model.muscles.push_back(mp);
        }
    }
}

}  // namespace

uint64_t fnv1a64(const std::string& bytes) {
    uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::vector<LossConfig> ExperimentConfig::loss_configs() const {
    std::vector<LossConfig> out;
    for (const std::string& name : config_names) out.push_back(LossConfig::parse(name, alpha));
    return out;
}

int ExperimentConfig::effective_hidden(bool full_scale) const {
    if (hidden > 0) return hidden;
    return full_scale ? 1000 : 100;
}

int ExperimentConfig::effective_epochs(bool full_scale) const {
    if (epochs > 0) return epochs;
    return full_scale ? 20000 : 5000;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string raw = ss.str();

    json j;
    try {
        j = json::parse(raw);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("top level must be an object");
    reject_unknown(j, {"model", "data", "train", "losses", "output"}, "top level");

    ExperimentConfig cfg;
    cfg.config_hash = fnv1a64(raw);
    const auto base_dir = std::filesystem::path(path).parent_path();

    if (j.contains("model")) parse_model(j["model"], cfg.model);
    try {
        validate(cfg.model);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    if (!j.contains("data")) throw ConfigError("missing required section \"data\"");
    {
        const json& d = j["data"];
        reject_unknown(d, {"kind", "n_train", "eval_size", "seed", "external_csv"}, "data");
        if (d.contains("kind")) {
            try {
                cfg.kind = map_kind_from_name(d["kind"].get<std::string>());
            } catch (const std::exception& e) {
                throw ConfigError(std::string("data.kind: ") + e.what());
            }
        }
        if (d.contains("n_train")) {
            cfg.n_train.clear();
            const json& n = d["n_train"];
            if (n.is_array()) {
                for (const json& v : n) cfg.n_train.push_back(need_int(v, "data.n_train[]", 1));
            } else {
                cfg.n_train.push_back(need_int(n, "data.n_train", 1));
            }
            if (cfg.n_train.empty()) throw ConfigError("data.n_train must not be empty");
        }
        if (d.contains("eval_size")) cfg.eval_size = need_int(d["eval_size"], "data.eval_size", 1);
        if (d.contains("seed")) {
            if (!d["seed"].is_number_integer()) throw ConfigError("data.seed must be an integer");
            cfg.data_seed = d["seed"].get<uint64_t>();
        }
        if (d.contains("external_csv")) {
            const std::string rel = d["external_csv"].get<std::string>();
            cfg.external_csv = (base_dir / rel).string();
        }
    }

    if (j.contains("train")) {
        const json& t = j["train"];
        reject_unknown(t, {"epochs", "hidden", "adam", "eval_stride", "seeds"}, "train");
        if (t.contains("epochs")) cfg.epochs = need_int(t["epochs"], "train.epochs", 1);
        if (t.contains("hidden")) cfg.hidden = need_int(t["hidden"], "train.hidden", 1);
        if (t.contains("eval_stride"))
            cfg.eval_stride = need_int(t["eval_stride"], "train.eval_stride", 1);
        if (t.contains("adam")) {
            const json& a = t["adam"];
            reject_unknown(a, {"lr", "beta1", "beta2", "eps"}, "train.adam");
            if (a.contains("lr")) cfg.adam.lr = need_number(a["lr"], "train.adam.lr");
            if (a.contains("beta1")) cfg.adam.beta1 = need_number(a["beta1"], "train.adam.beta1");
            if (a.contains("beta2")) cfg.adam.beta2 = need_number(a["beta2"], "train.adam.beta2");
            if (a.contains("eps")) cfg.adam.eps = need_number(a["eps"], "train.adam.eps");
            if (cfg.adam.lr < 0) throw ConfigError("train.adam.lr must be >= 0");
            if (cfg.adam.beta1 < 0 || cfg.adam.beta1 >= 1 || cfg.adam.beta2 < 0 ||
                cfg.adam.beta2 >= 1)
                throw ConfigError("train.adam.beta1/beta2 must lie in [0, 1)");
            if (cfg.adam.eps <= 0) throw ConfigError("train.adam.eps must be > 0");
        }
        if (t.contains("seeds")) {
            cfg.seeds.clear();
            if (!t["seeds"].is_array() || t["seeds"].empty())
                throw ConfigError("train.seeds must be a nonempty array");
            for (const json& v : t["seeds"]) {
                if (!v.is_number_integer()) throw ConfigError("train.seeds must hold integers");
                cfg.seeds.push_back(v.get<uint64_t>());
            }
        }
    }

    if (j.contains("losses")) {
        const json& l = j["losses"];
        reject_unknown(l, {"configs", "alpha", "alphas"}, "losses");
        if (l.contains("configs")) {
            cfg.config_names.clear();
            if (!l["configs"].is_array() || l["configs"].empty())
                throw ConfigError("losses.configs must be a nonempty array");
            for (const json& v : l["configs"]) {
                const std::string name = v.get<std::string>();
                try {
                    LossConfig::parse(name, cfg.alpha);
                } catch (const std::exception& e) {
                    throw ConfigError(e.what());
                }
                cfg.config_names.push_back(name);
            }
        }
        if (l.contains("alpha")) {
            cfg.alpha = need_number(l["alpha"], "losses.alpha");
            if (!(cfg.alpha > 0)) throw ConfigError("losses.alpha must be > 0");
        }
        if (l.contains("alphas")) {
            cfg.alphas.clear();
            if (!l["alphas"].is_array() || l["alphas"].empty())
                throw ConfigError("losses.alphas must be a nonempty array");
            for (const json& v : l["alphas"]) {
                const double a = need_number(v, "losses.alphas[]");
                if (!(a > 0)) throw ConfigError("losses.alphas entries must be > 0");
                cfg.alphas.push_back(a);
            }
        }
    }

    if (j.contains("output")) {
        const json& o = j["output"];
        reject_unknown(o, {"dir"}, "output");
        if (o.contains("dir")) cfg.output_dir = (base_dir / o["dir"].get<std::string>()).string();
    } else {
        cfg.output_dir = (base_dir / "out").string();
    }

    for (int n : cfg.n_train)
        if (cfg.external_csv.empty() && n < 1) throw ConfigError("data.n_train must be >= 1");

    return cfg;
}

}  // namespace pimbs
