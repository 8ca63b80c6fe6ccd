#include "pimbs/dataset.hpp"

#include "pimbs/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "pimbs/tension_qp.hpp"

namespace pimbs {

namespace {

constexpr int kMaxResampleFactor = 1000;  // safety cap per requested sample

Dataset generate(const ArmModel& model, int n, uint64_t seed, MapKind kind) {
    if (n < 1) throw std::invalid_argument("generate: n must be >= 1");
    Dataset ds;
    ds.n_joints = model.n_joints();
    ds.n_muscles = model.n_muscles();
    ds.kind = kind;
    ds.seed = seed;
    ds.model_id = model_hash(model);
    ds.samples.reserve(n);

    Rng rng(seed);
    const long cap = static_cast<long>(kMaxResampleFactor) * n;
    long attempts = 0;
    while (ds.size() < n) {
        if (attempts++ > cap)
            throw NumericalError("generate: QP infeasible on nearly all draws; check the model");
        const JointState q = sample_theta(rng);
        const double f_min = (kind == MapKind::ATL) ? rng.uniform(10.0, 300.0) : 0.0;
        try {
            ds.samples.push_back(simulate_sample(model, q, f_min));
        } catch (const QpInfeasible&) {
            ++ds.resamples;
        }
    }
    return ds;
}

void append_fields(std::string& out, const char* prefix, int n) {
    char buf[32];
    for (int i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof buf, "%s_%d", prefix, i);
        if (!out.empty()) out += ',';
        out += buf;
    }
}

}  // namespace

const char* map_kind_name(MapKind k) { return k == MapKind::AL ? "al" : "atl"; }

MapKind map_kind_from_name(const std::string& name) {
    if (name == "al") return MapKind::AL;
    if (name == "atl") return MapKind::ATL;
    throw std::invalid_argument("unknown map kind: " + name + " (expected al or atl)");
}

JointState sample_theta(Rng& rng) {
    JointState q;
    q.theta[0] = rng.uniform(-0.5, 0.5);
    q.theta[1] = rng.uniform(-0.5, 0.5);
    return q;
}

Sample simulate_sample(const ArmModel& model, const JointState& q, double f_min) {
    QpSpec spec;
    spec.g = muscle_jacobian(model, q);
    spec.tau = gravity_torque(model, q);
    spec.w = QpSpec::identity_weights(model.n_muscles());
    spec.f_min = f_min;
    const QpSolution sol = solve_tension_qp(spec);

    Sample s;
    s.theta.assign(q.theta.begin(), q.theta.end());
    s.f = sol.f;
    s.l = measured_length(model, q, sol.f);
    s.tau = spec.tau;
    return s;
}

Dataset generate_al(const ArmModel& model, int n, uint64_t seed) {
    return generate(model, n, seed, MapKind::AL);
}

Dataset generate_atl(const ArmModel& model, int n, uint64_t seed) {
    return generate(model, n, seed, MapKind::ATL);
}

std::pair<Dataset, Dataset> split(const Dataset& data, int n_train, uint64_t seed) {
    if (n_train < 1 || n_train >= data.size())
        throw std::invalid_argument("split: need 1 <= n_train < dataset size");

    std::vector<int> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    for (int i = data.size() - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.next_below(static_cast<uint64_t>(i) + 1));
        std::swap(order[i], order[j]);
    }

    Dataset train = data, eval = data;
    train.samples.clear();
    eval.samples.clear();
    for (int i = 0; i < n_train; ++i) train.samples.push_back(data.samples[order[i]]);
    for (int i = n_train; i < data.size(); ++i) eval.samples.push_back(data.samples[order[i]]);
    return {std::move(train), std::move(eval)};
}

void save_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);

    out << "# pimbs dataset kind=" << map_kind_name(data.kind) << " seed=" << data.seed
        << " provenance=" << data.provenance << " resamples=" << data.resamples;
    if (!data.model_id.empty()) out << " model=" << data.model_id;
    out << "\n";

    std::string header;
    append_fields(header, "theta", data.n_joints);
    append_fields(header, "f", data.n_muscles);
    append_fields(header, "l", data.n_muscles);
    append_fields(header, "tau", data.n_joints);
    out << header << "\n";

    char buf[40];
    auto put = [&](double v, bool first) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        if (!first) out << ',';
        out << buf;
    };
    for (const Sample& s : data.samples) {
        bool first = true;
        for (double v : s.theta) put(v, std::exchange(first, false));
        for (double v : s.f) put(v, std::exchange(first, false));
        for (double v : s.l) put(v, std::exchange(first, false));
        for (double v : s.tau) put(v, std::exchange(first, false));
        out << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    for (auto& f : out) {
        const auto b = f.find_first_not_of(" \t\r");
        const auto e = f.find_last_not_of(" \t\r");
        f = (b == std::string::npos) ? std::string() : f.substr(b, e - b + 1);
    }
    return out;
}

int count_prefixed(const std::vector<std::string>& fields, size_t start, const char* prefix,
                   int line_no) {
    int n = 0;
    const size_t plen = std::strlen(prefix);
    for (size_t i = start; i < fields.size(); ++i) {
        const std::string expected = std::string(prefix) + "_" + std::to_string(n);
        if (fields[i].size() > plen && fields[i].compare(0, plen, prefix) == 0 &&
            fields[i][plen] == '_') {
            if (fields[i] != expected)
                throw CsvError(line_no, "expected column " + expected + ", got " + fields[i]);
            ++n;
        } else {
            break;
        }
    }
    if (n == 0) throw CsvError(line_no, std::string("missing ") + prefix + "_* columns");
    return n;
}

}  // namespace

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);

    Dataset ds;
    ds.provenance = "external";
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    size_t expected_fields = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            // provenance comment; pick up kind/seed when present
            std::istringstream ss(line.substr(1));
            std::string tok;
            while (ss >> tok) {
                if (tok.rfind("kind=", 0) == 0) {
                    try {
                        ds.kind = map_kind_from_name(tok.substr(5));
                    } catch (const std::invalid_argument&) {
                        throw CsvError(line_no, "bad kind in provenance comment");
                    }
                } else if (tok.rfind("seed=", 0) == 0) {
                    ds.seed = std::strtoull(tok.c_str() + 5, nullptr, 10);
                } else if (tok.rfind("provenance=", 0) == 0) {
                    ds.provenance = tok.substr(11);
                } else if (tok.rfind("model=", 0) == 0) {
                    ds.model_id = tok.substr(6);
                }
            }
            continue;
        }
        if (!header_seen) {
            const auto fields = split_fields(line);
            const int nj = count_prefixed(fields, 0, "theta", line_no);
            const int nm = count_prefixed(fields, nj, "f", line_no);
            const int nl = count_prefixed(fields, nj + nm, "l", line_no);
            if (nl != nm) throw CsvError(line_no, "l_* column count differs from f_*");
            const int nt = count_prefixed(fields, nj + 2 * nm, "tau", line_no);
            if (nt != nj) throw CsvError(line_no, "tau_* column count differs from theta_*");
            if (fields.size() != static_cast<size_t>(nj + 2 * nm + nt))
                throw CsvError(line_no, "unexpected trailing columns in header");
            ds.n_joints = nj;
            ds.n_muscles = nm;
            expected_fields = fields.size();
            header_seen = true;
            continue;
        }

        const auto fields = split_fields(line);
        if (fields.size() != expected_fields)
            throw CsvError(line_no, "expected " + std::to_string(expected_fields) + " fields, got " +
                                        std::to_string(fields.size()));
        Vec values;
        values.reserve(fields.size());
        for (const auto& f : fields) {
            if (f.empty()) throw CsvError(line_no, "empty field");
            char* end = nullptr;
            const double v = std::strtod(f.c_str(), &end);
            if (end != f.c_str() + f.size()) throw CsvError(line_no, "non-numeric field: " + f);
            if (!std::isfinite(v)) throw CsvError(line_no, "non-finite value: " + f);
            values.push_back(v);
        }
        Sample s;
        auto it = values.begin();
        s.theta.assign(it, it + ds.n_joints);
        it += ds.n_joints;
        s.f.assign(it, it + ds.n_muscles);
        it += ds.n_muscles;
        s.l.assign(it, it + ds.n_muscles);
        it += ds.n_muscles;
        s.tau.assign(it, it + ds.n_joints);
        ds.samples.push_back(std::move(s));
    }
    if (!header_seen) throw CsvError(line_no ? line_no : 1, "missing header");
    return ds;
}

}  // namespace pimbs
