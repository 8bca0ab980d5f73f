#include "cgs/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cgs/errors.hpp"
#include "cgs/evaluate.hpp"
#include "cgs/rng.hpp"

namespace cgs::data {

namespace {

constexpr double kStrongFactor = 1.0;  // variance contrast of full-strength carriers
constexpr double kWeakFactor = 0.3;    // contrast of the deliberately faint carrier
constexpr double kShift = 1.5;         // per-channel mean shift, in units of snr
constexpr double kWeakShift = 0.5;     // the faint carrier gets half the shift
constexpr double kSelfCheckFloor = 0.95;

struct Carrier {
    std::size_t node;
    std::size_t bit;      // 0 or 1
    double factor;        // variance contrast
    double shift_factor;  // scales the mean shift; < 1 keeps the carrier faint
    bool exact_variance;  // normalize the per-sample variance exactly
};

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void validate_spec(const TaskSpec& spec) {
    if (spec.layout != "grid" && spec.layout != "ring") {
        throw ParameterError("task layout must be 'grid' or 'ring', got '" +
                             spec.layout + "'");
    }
    if (spec.placement != "near" && spec.placement != "far" &&
        spec.placement != "split") {
        throw ParameterError("task placement must be 'near', 'far' or 'split', got '" +
                             spec.placement + "'");
    }
    if (spec.channels < 2) {
        throw ParameterError("task needs at least 2 channels per node for the "
                             "variance coding, got " + std::to_string(spec.channels));
    }
    if (!(spec.snr > 0.0)) {
        throw ParameterError("task snr must be positive");
    }
    if (spec.samples < 40) {
        throw ParameterError("task needs at least 40 samples, got " +
                             std::to_string(spec.samples));
    }
}

std::vector<Carrier> plan_carriers(const TaskSpec& spec, const topo::NodeLayout& layout,
                                   const topo::DistanceMatrix& dist) {
    const std::size_t n = layout.size();
    std::vector<Carrier> carriers;
    if (spec.placement == "near") {
        if (n < 2) throw ParameterError("'near' placement needs at least 2 nodes");
        carriers.push_back({0, 0, kStrongFactor, 1.0, true});
        carriers.push_back({1, 1, kStrongFactor, 1.0, true});
    } else if (spec.placement == "far") {
        if (n < 2) throw ParameterError("'far' placement needs at least 2 nodes");
        std::size_t far = 1;
        for (std::size_t j = 2; j < n; ++j) {
            if (dist.at(0, j) > dist.at(0, far)) far = j;
        }
        carriers.push_back({0, 0, kStrongFactor, 1.0, true});
        carriers.push_back({far, 1, kStrongFactor, 1.0, true});
    } else {  // split: redundant strong trio plus one faint far-away carrier
        if (n < 4) throw ParameterError("'split' placement needs at least 4 nodes");
        carriers.push_back({0, 0, kStrongFactor, 1.0, true});
        carriers.push_back({1, 0, kStrongFactor, 1.0, true});
        carriers.push_back({2, 0, kStrongFactor, 1.0, true});
        carriers.push_back({n - 1, 1, kWeakFactor, kWeakShift, false});
    }
    return carriers;
}

}  // namespace

GeneratedTask make_planted_task(const TaskSpec& spec) {
    validate_spec(spec);
    topo::NodeLayout layout;
    if (spec.layout == "grid") {
        layout = topo::NodeLayout::grid(spec.rows, spec.cols);
    } else {
        layout = topo::NodeLayout::ring(spec.rows * spec.cols);
    }
    const topo::DistanceMatrix dist = topo::DistanceMatrix::from_layout(layout);
    const std::size_t n = layout.size();
    const std::size_t L = spec.channels;
    const std::vector<Carrier> carriers = plan_carriers(spec, layout, dist);

    // carrier lookup per node
    std::vector<const Carrier*> by_node(n, nullptr);
    for (const Carrier& c : carriers) by_node[c.node] = &c;

    Dataset ds;
    ds.n_nodes = n;
    ds.n_channels = L;
    ds.n_classes = 4;
    ds.x.assign(spec.samples, std::vector<double>(n * L, 0.0));
    ds.y.resize(spec.samples);

    Rng rng(Rng::sub_seed(spec.seed, 0xda7a));
    std::vector<double> buf(L);
    for (std::size_t s = 0; s < spec.samples; ++s) {
        const std::size_t b0 = rng.below(2);
        const std::size_t b1 = rng.below(2);
        ds.y[s] = static_cast<int>(2 * b0 + b1);
        for (std::size_t node = 0; node < n; ++node) {
            const Carrier* car = by_node[node];
            const std::size_t bit = car ? (car->bit == 0 ? b0 : b1) : 0;
            const double sigma =
                spec.snr * (car ? 1.0 + car->factor * static_cast<double>(bit) : 1.0);
            // Draw, then center so the channel sum carries only the planted
            // mean shift. Redraw in the (measure-zero) degenerate case.
            double sq = 0.0;
            do {
                double mean = 0.0;
                for (std::size_t c = 0; c < L; ++c) {
                    buf[c] = rng.normal();
                    mean += buf[c];
                }
                mean /= static_cast<double>(L);
                sq = 0.0;
                for (std::size_t c = 0; c < L; ++c) {
                    buf[c] -= mean;
                    sq += buf[c] * buf[c];
                }
            } while (sq == 0.0);
            double noise_scale = sigma;
            if (!car || car->exact_variance) {
                // Rescale so the per-sample channel variance lands exactly on
                // sigma^2, making the log-variance summary noiseless.
                noise_scale = sigma * std::sqrt(static_cast<double>(L) / sq);
            }
            const double shift =
                car ? kShift * car->shift_factor * spec.snr * static_cast<double>(bit)
                    : 0.0;
            for (std::size_t c = 0; c < L; ++c) {
                ds.x[s][node * L + c] = noise_scale * buf[c] + shift;
            }
        }
    }

    GeneratedTask task;
    task.data = std::move(ds);
    task.layout = layout;

    nlohmann::ordered_json meta;
    meta["layout"] = spec.layout;
    meta["rows"] = spec.rows;
    meta["cols"] = spec.cols;
    meta["nodes"] = n;
    meta["channels"] = L;
    meta["classes"] = 4;
    meta["placement"] = spec.placement;
    meta["snr"] = spec.snr;
    meta["samples"] = spec.samples;
    meta["seed"] = spec.seed;
    std::vector<std::size_t> bit0, bit1;
    for (const Carrier& c : carriers) (c.bit == 0 ? bit0 : bit1).push_back(c.node);
    meta["carriers_bit0"] = bit0;
    meta["carriers_bit1"] = bit1;
    meta["strong_factor"] = kStrongFactor;
    meta["weak_factor"] = kWeakFactor;
    meta["shift"] = kShift;
    meta["weak_shift"] = kWeakShift;
    nlohmann::ordered_json pos = nlohmann::ordered_json::array();
    for (const auto& p : layout.points) pos.push_back({p[0], p[1]});
    meta["positions"] = std::move(pos);

    // The planted signal must actually be recoverable, otherwise every
    // downstream comparison is meaningless.
    std::vector<std::size_t> informative = bit0;
    informative.insert(informative.end(), bit1.begin(), bit1.end());
    std::sort(informative.begin(), informative.end());
    const eval::Splits sp =
        eval::make_splits(task.data.y, 4, Rng::sub_seed(spec.seed, 0x5011));
    const double acc = eval::probe_accuracy(task.data, informative, sp);
    if (acc < kSelfCheckFloor) {
        throw ParameterError("planted task self-check failed: probe accuracy " +
                             format_double(acc) + " on the informative nodes is below " +
                             format_double(kSelfCheckFloor) +
                             "; raise snr or samples");
    }
    meta["probe_selfcheck"] = acc;
    task.meta = std::move(meta);
    return task;
}

void save_task(const GeneratedTask& task, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path base(dir);
    {
        std::ofstream out(base / "data.csv");
        if (!out) throw IngestError("cannot open " + (base / "data.csv").string() +
                                    " for writing");
        out << "label";
        for (std::size_t n = 0; n < task.data.n_nodes; ++n) {
            for (std::size_t c = 0; c < task.data.n_channels; ++c) {
                out << ",n" << n << "_c" << c;
            }
        }
        out << "\n";
        for (std::size_t s = 0; s < task.data.size(); ++s) {
            out << task.data.y[s];
            for (double v : task.data.x[s]) out << "," << format_double(v);
            out << "\n";
        }
    }
    {
        std::ofstream out(base / "meta.json");
        if (!out) throw IngestError("cannot open " + (base / "meta.json").string() +
                                    " for writing");
        out << task.meta.dump(2) << "\n";
    }
}

GeneratedTask load_task(const std::string& dir) {
    const std::filesystem::path base(dir);
    GeneratedTask task;

    {
        std::ifstream in(base / "meta.json");
        if (!in) throw IngestError("cannot open " + (base / "meta.json").string());
        try {
            task.meta = nlohmann::ordered_json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw IngestError("meta.json: " + std::string(e.what()));
        }
    }
    for (const char* key : {"nodes", "channels", "classes", "samples", "positions"}) {
        if (!task.meta.contains(key)) {
            throw IngestError("meta.json: missing key '" + std::string(key) + "'");
        }
    }
    const std::size_t n = task.meta.at("nodes").get<std::size_t>();
    const std::size_t L = task.meta.at("channels").get<std::size_t>();
    const std::size_t C = task.meta.at("classes").get<std::size_t>();
    const std::size_t S = task.meta.at("samples").get<std::size_t>();

    const auto& pos = task.meta.at("positions");
    if (!pos.is_array() || pos.size() != n) {
        throw IngestError("meta.json: positions must list one [x, y] per node");
    }
    std::vector<std::array<double, 2>> pts;
    for (const auto& p : pos) {
        if (!p.is_array() || p.size() != 2) {
            throw IngestError("meta.json: positions must list one [x, y] per node");
        }
        pts.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    task.layout = topo::NodeLayout::custom(std::move(pts));

    Dataset& ds = task.data;
    ds.n_nodes = n;
    ds.n_channels = L;
    ds.n_classes = C;

    std::ifstream in(base / "data.csv");
    if (!in) throw IngestError("cannot open " + (base / "data.csv").string());
    std::string line;
    std::size_t line_no = 0;
    const std::size_t want_fields = 1 + n * L;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1) continue;  // header
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != want_fields) {
            throw IngestError("data.csv line " + std::to_string(line_no) + ": expected " +
                              std::to_string(want_fields) + " fields, got " +
                              std::to_string(fields.size()));
        }
        std::size_t used = 0;
        int label = 0;
        try {
            label = std::stoi(fields[0], &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != fields[0].size() || label < 0 || static_cast<std::size_t>(label) >= C) {
            throw IngestError("data.csv line " + std::to_string(line_no) +
                              ": bad label '" + fields[0] + "'");
        }
        std::vector<double> row(n * L);
        for (std::size_t i = 0; i < n * L; ++i) {
            try {
                row[i] = std::stod(fields[i + 1], &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != fields[i + 1].size()) {
                throw IngestError("data.csv line " + std::to_string(line_no) +
                                  ": bad number '" + fields[i + 1] + "' in field " +
                                  std::to_string(i + 2));
            }
        }
        ds.y.push_back(label);
        ds.x.push_back(std::move(row));
    }
    if (ds.size() != S) {
        throw IngestError("data.csv holds " + std::to_string(ds.size()) +
                          " samples but meta.json promises " + std::to_string(S));
    }
    return task;
}

std::vector<std::size_t> informative_nodes(const GeneratedTask& task) {
    std::vector<std::size_t> out;
    for (const char* key : {"carriers_bit0", "carriers_bit1"}) {
        if (!task.meta.contains(key)) continue;
        for (const auto& v : task.meta.at(key)) out.push_back(v.get<std::size_t>());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace cgs::data
