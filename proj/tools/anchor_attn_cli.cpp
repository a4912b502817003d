// Command-line harness: workload generation, sparse pipeline runs, theta
// sweeps and identification-scheme comparisons, all emitted as CSV.

#include <CLI11.hpp>

#include <cstring>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "anchorattn/anchor_pass.hpp"
#include "anchorattn/baselines.hpp"
#include "anchorattn/metrics.hpp"
#include "anchorattn/oracle.hpp"
#include "anchorattn/parallel.hpp"
#include "anchorattn/sparse_exec.hpp"
#include "anchorattn/stripe_identify.hpp"
#include "anchorattn/workload_io.hpp"
#include "anchorattn/workloads.hpp"

using namespace anchorattn;

namespace {

constexpr std::size_t kOracleCap = 8192;  // dense maps above this are refused
constexpr const char* kCsvHeader =
    "head_id,theta_or_param,sparsity,recall,max_abs_err,mean_abs_err,"
    "computed_positions";

struct CsvRow {
    std::string head_id;
    std::string param;
    EvalReport report;
    bool has_err = false;
};

void print_rows(std::ostream& os, const std::vector<CsvRow>& rows) {
    os.precision(10);
    os << kCsvHeader << "\n";
    for (const CsvRow& r : rows) {
        os << r.head_id << ',' << r.param << ',' << r.report.sparsity << ','
           << r.report.recall << ',';
        if (r.has_err) {
            os << r.report.max_abs_err << ',' << r.report.mean_abs_err;
        } else {
            os << "nan,nan";
        }
        os << ',' << r.report.computed_positions << "\n";
    }
}

// Arithmetic mean over per-head rows sharing one parameter value.
CsvRow mean_row(const std::vector<CsvRow>& rows, const std::string& param) {
    CsvRow mean;
    mean.head_id = "mean";
    mean.param = param;
    std::size_t count = 0;
    double positions = 0.0;
    for (const CsvRow& r : rows) {
        if (r.param != param || r.head_id == "mean") continue;
        mean.report.sparsity += r.report.sparsity;
        mean.report.recall += r.report.recall;
        mean.report.max_abs_err += r.report.max_abs_err;
        mean.report.mean_abs_err += r.report.mean_abs_err;
        positions += static_cast<double>(r.report.computed_positions);
        mean.has_err |= r.has_err;
        ++count;
    }
    if (count > 0) {
        const double inv = 1.0 / static_cast<double>(count);
        mean.report.sparsity *= inv;
        mean.report.recall *= inv;
        mean.report.max_abs_err *= inv;
        mean.report.mean_abs_err *= inv;
        mean.report.computed_positions = static_cast<std::size_t>(positions * inv);
    }
    return mean;
}

std::ofstream open_or_die(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open output file " + path);
    return os;
}

void emit(const std::vector<CsvRow>& rows, const std::string& out_csv) {
    if (out_csv.empty()) {
        print_rows(std::cout, rows);
    } else {
        auto os = open_or_die(out_csv);
        print_rows(os, rows);
    }
}

std::vector<std::size_t> parse_size_list(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stoul(item));
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

std::string format_theta(double theta) {
    std::ostringstream ss;
    ss << theta;
    return ss.str();
}

// Attention outputs: "AOUT", version u32 = 1, head_count u32, n u64, d u32,
// dtype u8 (0 = f32), 3 reserved bytes, then per head the output rows.
void write_outputs(const std::string& path, const std::vector<Matrix>& outputs) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open output file " + path);
    auto put_u32 = [&](std::uint32_t v) {
        const unsigned char b[4] = {static_cast<unsigned char>(v),
                                    static_cast<unsigned char>(v >> 8),
                                    static_cast<unsigned char>(v >> 16),
                                    static_cast<unsigned char>(v >> 24)};
        os.write(reinterpret_cast<const char*>(b), 4);
    };
    os.write("AOUT", 4);
    put_u32(1);
    put_u32(static_cast<std::uint32_t>(outputs.size()));
    put_u32(static_cast<std::uint32_t>(outputs.front().rows));
    put_u32(0);
    put_u32(static_cast<std::uint32_t>(outputs.front().cols));
    const char dtype[4] = {0, 0, 0, 0};
    os.write(dtype, 4);
    for (const Matrix& m : outputs) {
        for (float x : m.data) {
            std::uint32_t bits;
            std::memcpy(&bits, &x, 4);
            put_u32(bits);
        }
    }
    if (!os) throw std::runtime_error("write failed for " + path);
}

// ---- gen ----------------------------------------------------------------

struct GenArgs {
    std::string kind = "random";
    std::size_t n = 1024;
    std::size_t d = 32;
    std::size_t heads = 1;
    std::uint64_t seed = 0;
    std::string out;
    double sink_strength = 12.0;
    std::size_t window = 128;
    std::string stripes;
    double mass_fraction = 0.6;
    std::string vanish;
};

int run_gen(const GenArgs& a) {
    std::vector<HeadWorkload> heads;
    if (a.kind == "random") {
        heads = gen_random(a.n, a.d, a.heads, a.seed);
    } else if (a.kind == "sink") {
        for (std::size_t h = 0; h < a.heads; ++h) {
            heads.push_back(
                gen_sink_local(a.n, a.d, a.sink_strength, a.window, a.seed + h));
        }
    } else if (a.kind == "planted") {
        const auto cols = parse_size_list(a.stripes);
        std::optional<VanishRange> vanish;
        if (!a.vanish.empty()) {
            const auto sep = a.vanish.find(':');
            if (sep == std::string::npos) {
                throw std::runtime_error("--vanish expects BEGIN:END");
            }
            vanish = VanishRange{std::stoul(a.vanish.substr(0, sep)),
                                 std::stoul(a.vanish.substr(sep + 1))};
        }
        for (std::size_t h = 0; h < a.heads; ++h) {
            heads.push_back(gen_planted_stripes(a.n, a.d, cols, a.mass_fraction,
                                                a.seed + h, vanish));
        }
    } else {
        throw std::runtime_error("unknown generator kind: " + a.kind);
    }
    write_workload(a.out, heads);
    std::cout << "wrote " << heads.size() << " head(s), n=" << a.n << ", d=" << a.d
              << " to " << a.out << "\n";
    return 0;
}

// ---- run / sweep ---------------------------------------------------------

struct PipelineArgs {
    std::string workload;
    std::size_t b_q = 128;
    std::size_t b_kv = 128;
    std::size_t step = 16;
    bool no_anchor = false;
    std::string out_csv;
};

BlockConfig config_of(const PipelineArgs& a, double theta) {
    BlockConfig cfg;
    cfg.b_q = a.b_q;
    cfg.b_kv = a.b_kv;
    cfg.step = a.step;
    cfg.theta = theta;
    cfg.validate();
    return cfg;
}

struct HeadEval {
    SparseResult result;
    double recall = 0.0;
};

HeadEval eval_head(const HeadWorkload& head, const BlockConfig& cfg,
                   bool zero_anchor, const Matrix* probs) {
    HeadEval ev;
    const AnchorState state = compute_anchor(head, cfg);
    const StripeIndex idx = zero_anchor ? identify_stripes_zero_anchor(head, cfg)
                                        : identify_stripes(head, state, cfg);
    ev.result = sparse_attention(head, state, idx, cfg);
    if (probs != nullptr) {
        ev.result.stats.recall = recall(union_mask(idx, cfg, head.n), *probs);
        ev.recall = ev.result.stats.recall;
    }
    return ev;
}

int run_run(const PipelineArgs& a, double theta, bool oracle,
            const std::string& dump_output) {
    const auto heads = read_workload(a.workload);
    const BlockConfig cfg = config_of(a, theta);
    const bool with_recall = heads.front().n <= kOracleCap;
    if (!with_recall) {
        std::cerr << "note: n > " << kOracleCap
                  << ", recall and oracle errors are skipped\n";
    }

    std::vector<CsvRow> rows(heads.size());
    std::vector<Matrix> outputs(heads.size());
    parallel_for(heads.size(), [&](std::size_t h) {
        const HeadWorkload& head = heads[h];
        std::optional<Matrix> probs;
        if (with_recall) probs = dense_probs(head.q, head.k);
        const HeadEval ev =
            eval_head(head, cfg, a.no_anchor, probs ? &*probs : nullptr);
        CsvRow row;
        row.head_id = std::to_string(h);
        row.param = format_theta(theta);
        row.report.sparsity = ev.result.stats.sparsity;
        row.report.recall = ev.recall;
        row.report.computed_positions = ev.result.stats.computed_positions;
        if (oracle && with_recall) {
            const AttentionOutput dense = dense_attention(head);
            const auto [mx, mean] = output_error(ev.result.out, dense);
            row.report.max_abs_err = mx;
            row.report.mean_abs_err = mean;
            row.has_err = true;
        }
        rows[h] = row;
        outputs[h] = ev.result.out.o;
    });

    std::vector<CsvRow> all = rows;
    all.push_back(mean_row(rows, format_theta(theta)));
    emit(all, a.out_csv);

    if (!dump_output.empty()) {
        write_outputs(dump_output, outputs);
    }
    return 0;
}

int run_sweep(const PipelineArgs& a, const std::vector<double>& thetas) {
    if (thetas.empty()) throw std::runtime_error("sweep: empty theta list");
    const auto heads = read_workload(a.workload);
    if (heads.front().n > kOracleCap) {
        throw std::runtime_error("sweep needs the dense probability map; n > 8192");
    }

    std::vector<std::vector<CsvRow>> per_head(heads.size());
    parallel_for(heads.size(), [&](std::size_t h) {
        const HeadWorkload& head = heads[h];
        const Matrix probs = dense_probs(head.q, head.k);
        for (double theta : thetas) {
            const BlockConfig cfg = config_of(a, theta);
            const HeadEval ev = eval_head(head, cfg, a.no_anchor, &probs);
            CsvRow row;
            row.head_id = std::to_string(h);
            row.param = format_theta(theta);
            row.report.sparsity = ev.result.stats.sparsity;
            row.report.recall = ev.recall;
            row.report.computed_positions = ev.result.stats.computed_positions;
            per_head[h].push_back(row);
        }
    });

    std::vector<CsvRow> rows;
    for (const auto& head_rows : per_head) {
        rows.insert(rows.end(), head_rows.begin(), head_rows.end());
    }
    for (double theta : thetas) {
        rows.push_back(mean_row(rows, format_theta(theta)));
    }
    emit(rows, a.out_csv);
    return 0;
}

// ---- compare ---------------------------------------------------------------

struct SchemeSpec {
    std::string text;     // e.g. topk:8
    std::string kind;     // topk | topcdf | diff | streaming
    double value = 0.0;   // k / gamma / theta
    std::size_t init = 0;  // streaming init tokens
    std::size_t local = 0; // streaming local tokens
};

SchemeSpec parse_scheme(const std::string& text) {
    SchemeSpec s;
    s.text = text;
    const auto sep = text.find(':');
    if (sep == std::string::npos) throw std::runtime_error("bad scheme: " + text);
    s.kind = text.substr(0, sep);
    const std::string rest = text.substr(sep + 1);
    if (s.kind == "topk" || s.kind == "topcdf" || s.kind == "diff") {
        s.value = std::stod(rest);
    } else if (s.kind == "streaming") {
        const auto comma = rest.find(',');
        if (comma == std::string::npos) {
            throw std::runtime_error("streaming scheme expects INIT,LOCAL");
        }
        s.init = std::stoul(rest.substr(0, comma));
        s.local = std::stoul(rest.substr(comma + 1));
    } else {
        throw std::runtime_error("unknown scheme: " + s.kind);
    }
    return s;
}

Granularity parse_granularity(const std::string& text) {
    const auto x = text.find('x');
    if (x == std::string::npos) {
        throw std::runtime_error("granularity expects ROWSxCOLS, e.g. 128x1");
    }
    return {std::stoul(text.substr(0, x)), std::stoul(text.substr(x + 1))};
}

int run_compare(const std::string& workload, const std::vector<std::string>& schemes,
                const std::vector<std::string>& granularities,
                const std::string& out_csv) {
    std::vector<SchemeSpec> specs;
    for (const auto& s : schemes) specs.push_back(parse_scheme(s));
    std::vector<std::pair<std::string, Granularity>> grans;
    for (const auto& g : granularities) grans.push_back({g, parse_granularity(g)});
    if (grans.empty()) grans.push_back({"1x1", {1, 1}});

    const auto heads = read_workload(workload);
    if (heads.front().n > kOracleCap) {
        throw std::runtime_error("compare needs dense probability maps; n > 8192");
    }

    std::vector<std::vector<CsvRow>> per_head(heads.size());
    parallel_for(heads.size(), [&](std::size_t h) {
        const HeadWorkload& head = heads[h];
        const Matrix probs = dense_probs(head.q, head.k);
        const Matrix scores = dense_scores(head.q, head.k);
        for (const SchemeSpec& s : specs) {
            if (s.kind == "streaming") {
                const SelectionMask mask = streaming_mask(head.n, s.init, s.local);
                CsvRow row;
                row.head_id = std::to_string(h);
                row.param = s.text;
                row.report.sparsity = sparsity(mask);
                row.report.recall = recall(mask, probs);
                row.report.computed_positions = mask.total_selected();
                per_head[h].push_back(row);
                continue;
            }
            for (const auto& [gname, gran] : grans) {
                SelectionMask mask;
                if (s.kind == "topk") {
                    mask = select_topk(probs, static_cast<std::size_t>(s.value), gran);
                } else if (s.kind == "topcdf") {
                    mask = select_topcdf(probs, s.value, gran);
                } else {
                    mask = select_diff_aware(scores, s.value, gran);
                }
                CsvRow row;
                row.head_id = std::to_string(h);
                row.param = s.text + "@" + gname;
                row.report.sparsity = sparsity(mask);
                row.report.recall = recall(mask, probs);
                row.report.computed_positions = mask.total_selected();
                per_head[h].push_back(row);
            }
        }
    });

    std::vector<CsvRow> rows;
    for (const auto& head_rows : per_head) {
        rows.insert(rows.end(), head_rows.begin(), head_rows.end());
    }
    emit(rows, out_csv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"AnchorAttention reference harness"};
    app.require_subcommand(1);

    GenArgs gen_args;
    CLI::App* gen = app.add_subcommand("gen", "generate a synthetic workload file");
    gen->add_option("--kind", gen_args.kind, "random | sink | planted");
    gen->add_option("--n", gen_args.n, "sequence length");
    gen->add_option("--d", gen_args.d, "head dimension");
    gen->add_option("--heads", gen_args.heads, "head count");
    gen->add_option("--seed", gen_args.seed, "rng seed");
    gen->add_option("--out", gen_args.out, "output .aqkv path")->required();
    gen->add_option("--sink-strength", gen_args.sink_strength, "sink logit scale");
    gen->add_option("--window", gen_args.window, "local window for the sink check");
    gen->add_option("--stripes", gen_args.stripes, "comma list of planted columns");
    gen->add_option("--mass-fraction", gen_args.mass_fraction,
                    "target planted+anchor probability mass");
    gen->add_option("--vanish", gen_args.vanish, "BEGIN:END rows where stripes vanish");

    PipelineArgs run_args;
    double run_theta = 12.0;
    bool run_oracle = false;
    std::string run_dump;
    CLI::App* run = app.add_subcommand("run", "run the sparse pipeline once");
    run->add_option("--workload", run_args.workload, "input .aqkv")->required();
    run->add_option("--b-q", run_args.b_q, "query block size");
    run->add_option("--b-kv", run_args.b_kv, "key/value block size");
    run->add_option("--step", run_args.step, "query-group width in blocks");
    run->add_option("--theta", run_theta, "selection threshold");
    run->add_flag("--oracle", run_oracle, "also compute dense attention errors");
    run->add_option("--out-csv", run_args.out_csv, "CSV path (default stdout)");
    run->add_option("--dump-output", run_dump, "write attention outputs (AQKV layout)");

    PipelineArgs sweep_args;
    std::string sweep_thetas = "6,8,10,12,14,16";
    CLI::App* sweep = app.add_subcommand("sweep", "sweep theta values");
    sweep->add_option("--workload", sweep_args.workload, "input .aqkv")->required();
    sweep->add_option("--b-q", sweep_args.b_q, "query block size");
    sweep->add_option("--b-kv", sweep_args.b_kv, "key/value block size");
    sweep->add_option("--step", sweep_args.step, "query-group width in blocks");
    sweep->add_option("--thetas", sweep_thetas, "comma list of theta values");
    sweep->add_flag("--no-anchor", sweep_args.no_anchor,
                    "identify against a zero anchor (ablation arm)");
    sweep->add_option("--out-csv", sweep_args.out_csv, "CSV path (default stdout)");

    std::string cmp_workload;
    std::vector<std::string> cmp_schemes;
    std::vector<std::string> cmp_grans;
    std::string cmp_out;
    CLI::App* cmp = app.add_subcommand("compare",
                                       "compare identification schemes on oracle maps");
    cmp->add_option("--workload", cmp_workload, "input .aqkv")->required();
    cmp->add_option("--scheme", cmp_schemes,
                    "topk:K | topcdf:G | diff:T | streaming:INIT,LOCAL (repeatable)")
        ->required();
    cmp->add_option("--granularity", cmp_grans, "ROWSxCOLS, e.g. 128x1 (repeatable)");
    cmp->add_option("--out-csv", cmp_out, "CSV path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return run_gen(gen_args);
        if (run->parsed()) return run_run(run_args, run_theta, run_oracle, run_dump);
        if (sweep->parsed()) return run_sweep(sweep_args, parse_double_list(sweep_thetas));
        if (cmp->parsed()) return run_compare(cmp_workload, cmp_schemes, cmp_grans, cmp_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
