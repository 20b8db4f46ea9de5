#include "hamlet/trace.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "hamlet/error.hpp"
#include "hamlet/random.hpp"
#include "text_util.hpp"

namespace hamlet {

using nlohmann::json;

double SaturatingCurve::operator()(double t) const {
    return asymptote * (1.0 - std::exp(-rate * std::max(0.0, t - delay)));
}

void SyntheticSpec::validate() const {
    if (arms.empty()) throw DomainError("synthetic spec: at least one arm required");
    if (!(horizon > 0.0)) throw DomainError("synthetic spec: horizon must be positive");
    if (!(mean_gap > 0.0)) throw DomainError("synthetic spec: mean_gap must be positive");
    if (!(noise >= 0.0)) throw DomainError("synthetic spec: noise must be non-negative");
    for (std::size_t i = 0; i < arms.size(); ++i) {
        const auto& a = arms[i];
        const std::string where = "synthetic spec arm " + std::to_string(i) + ": ";
        if (!(a.asymptote >= 0.0 && a.asymptote <= 1.0)) throw DomainError(where + "asymptote must be in [0,1]");
        if (!(a.rate > 0.0)) throw DomainError(where + "rate must be positive");
        if (!(a.delay >= 0.0)) throw DomainError(where + "delay must be non-negative");
    }
}

void validate_trace(const TuningTrace& trace) {
    const std::string where = "trace " + trace.dataset_id + "/" + trace.arm_id + ": ";
    if (trace.arm_id.empty()) throw DomainError(where + "empty arm_id");
    if (trace.dataset_id.empty()) throw DomainError(where + "empty dataset_id");
    for (std::size_t i = 0; i < trace.events.size(); ++i) {
        const auto& e = trace.events[i];
        if (!std::isfinite(e.t) || e.t < 0.0)
            throw DomainError(where + "event " + std::to_string(i) + " has invalid time");
        if (!std::isfinite(e.accuracy) || e.accuracy < 0.0 || e.accuracy > 1.0)
            throw DomainError(where + "event " + std::to_string(i) + " has accuracy outside [0,1]");
        if (i > 0 && !(e.t > trace.events[i - 1].t))
            throw DomainError(where + "event " + std::to_string(i) + " does not strictly follow its predecessor in t");
    }
}

TraceFormat trace_format_from_path(const std::filesystem::path& path) {
    return path.extension() == ".json" ? TraceFormat::json : TraceFormat::csv;
}

namespace {

// Rows accumulate per (dataset, arm) in file order; the trace is sorted by t
// afterwards and duplicate timestamps are rejected.
struct Builder {
    TraceCollection out;
    std::map<std::pair<std::string, std::string>, std::size_t> index;

    TuningTrace& trace_for(const std::string& dataset, const std::string& arm) {
        auto key = std::make_pair(dataset, arm);
        auto it = index.find(key);
        auto& group = out[dataset];
        if (it != index.end()) return group[it->second];
        index.emplace(key, group.size());
        group.push_back(TuningTrace{arm, dataset, {}});
        return group.back();
    }

    TraceCollection finish() {
        for (auto& [dataset, group] : out) {
            for (auto& trace : group) {
                std::stable_sort(trace.events.begin(), trace.events.end(),
                                 [](const TraceEvent& a, const TraceEvent& b) { return a.t < b.t; });
                for (std::size_t i = 1; i < trace.events.size(); ++i) {
                    if (trace.events[i].t == trace.events[i - 1].t) {
                        throw DomainError("trace " + dataset + "/" + trace.arm_id +
                                          ": duplicate elapsed_seconds " +
                                          detail::format_double(trace.events[i].t));
                    }
                }
                validate_trace(trace);
            }
        }
        return std::move(out);
    }
};

} // namespace

TraceCollection parse_traces_csv(const std::string& text, const std::string& source) {
    Builder builder;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto stripped = detail::trim(line);
        if (stripped.empty()) continue;
        const std::string where = source + ":" + std::to_string(line_no) + ": ";
        const auto fields = detail::split(stripped, ',');
        if (!header_seen) {
            if (fields.size() != 4 || fields[0] != "dataset_id" || fields[1] != "arm_id" ||
                fields[2] != "elapsed_seconds" || fields[3] != "accuracy") {
                throw ParseError(where + "expected header 'dataset_id,arm_id,elapsed_seconds,accuracy'");
            }
            header_seen = true;
            continue;
        }
        if (fields.size() != 4) {
            throw ParseError(where + "expected 4 fields, got " + std::to_string(fields.size()));
        }
        if (fields[0].empty() || fields[1].empty()) throw ParseError(where + "empty dataset_id or arm_id");
        const auto t = detail::parse_double(fields[2]);
        const auto acc = detail::parse_double(fields[3]);
        if (!t) throw ParseError(where + "elapsed_seconds is not a number");
        if (!acc) throw ParseError(where + "accuracy is not a number");
        if (!std::isfinite(*t) || *t < 0.0) throw DomainError(where + "elapsed_seconds must be finite and >= 0");
        if (!std::isfinite(*acc) || *acc < 0.0 || *acc > 1.0)
            throw DomainError(where + "accuracy " + std::string(fields[3]) + " outside [0,1]");
        builder.trace_for(std::string(fields[0]), std::string(fields[1])).events.push_back({*t, *acc});
    }
    if (!header_seen) throw ParseError(source + ": missing header row");
    return builder.finish();
}

TraceCollection parse_traces_json(const std::string& text, const std::string& source) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(source + ": " + e.what());
    }
    if (!doc.is_array()) throw ParseError(source + ": expected a top-level array of traces");
    Builder builder;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& item = doc[i];
        const std::string where = source + ": trace #" + std::to_string(i) + ": ";
        try {
            const auto dataset = item.at("dataset_id").get<std::string>();
            const auto arm = item.at("arm_id").get<std::string>();
            auto& trace = builder.trace_for(dataset, arm);
            for (const auto& ev : item.at("events")) {
                trace.events.push_back({ev.at("t").get<double>(), ev.at("accuracy").get<double>()});
            }
        } catch (const json::exception& e) {
            throw ParseError(where + e.what());
        }
    }
    return builder.finish();
}

TraceCollection load_traces(const std::filesystem::path& path, TraceFormat format) {
    const auto text = detail::read_file(path.string());
    return format == TraceFormat::csv ? parse_traces_csv(text, path.string())
                                      : parse_traces_json(text, path.string());
}

std::string format_traces_csv(const TraceCollection& traces) {
    std::string out = "dataset_id,arm_id,elapsed_seconds,accuracy\n";
    for (const auto& [dataset, group] : traces) {
        for (const auto& trace : group) {
            for (const auto& e : trace.events) {
                out += dataset;
                out += ',';
                out += trace.arm_id;
                out += ',';
                out += detail::format_double(e.t);
                out += ',';
                out += detail::format_double(e.accuracy);
                out += '\n';
            }
        }
    }
    return out;
}

std::string format_traces_json(const TraceCollection& traces) {
    json doc = json::array();
    for (const auto& [dataset, group] : traces) {
        for (const auto& trace : group) {
            json events = json::array();
            for (const auto& e : trace.events) events.push_back({{"t", e.t}, {"accuracy", e.accuracy}});
            doc.push_back({{"dataset_id", dataset}, {"arm_id", trace.arm_id}, {"events", std::move(events)}});
        }
    }
    return doc.dump(1) + "\n";
}

void save_traces(const std::filesystem::path& path, const TraceCollection& traces, TraceFormat format) {
    detail::write_file(path.string(), format == TraceFormat::csv ? format_traces_csv(traces) : format_traces_json(traces));
}

std::vector<TuningTrace> generate_traces(const SyntheticSpec& spec) {
    spec.validate();
    std::vector<TuningTrace> out;
    out.reserve(spec.arms.size());
    for (std::size_t i = 0; i < spec.arms.size(); ++i) {
        Rng rng(mix_seed(spec.seed, i));
        const auto& truth = spec.arms[i];
        TuningTrace trace{"arm" + std::to_string(i), spec.dataset_id, {}};
        double t = 0.0;
        for (;;) {
            t += rng.exponential(spec.mean_gap);
            if (t > spec.horizon) break;
            if (!trace.events.empty() && !(t > trace.events.back().t)) continue;
            const double score = truth(t) - spec.noise * std::fabs(rng.normal());
            trace.events.push_back({t, std::clamp(score, 0.0, 1.0)});
        }
        out.push_back(std::move(trace));
    }
    return out;
}

} // namespace hamlet
