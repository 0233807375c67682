// stabkit: stability analysis of finite [0,1]-valued formula tables.
//
// Subcommands: analyze, define, doublelimit, uniform, kernel.
// Exit codes: 0 success, 1 usage, 2 input/parse/validation, 3 numeric.

#include <chrono>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "stabkit/definability.hpp"
#include "stabkit/errors.hpp"
#include "stabkit/kernel.hpp"
#include "stabkit/order.hpp"
#include "stabkit/report.hpp"
#include "stabkit/table.hpp"
#include "stabkit/types_space.hpp"
#include "stabkit/version.hpp"

namespace {

using stabkit::json;

struct GlobalOpts {
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    std::string json_out;
    bool quiet = false;
};

struct TableSource {
    std::string table_file;
    std::string kernel_text;
    std::string x_file, y_file;
    std::string group_file;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw stabkit::parse_error("cannot open file: " + path, 0, 0);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(
                   std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

stabkit::FormulaTable load_source(const TableSource& src,
                                  stabkit::InputDigest& digest) {
    const bool have_table = !src.table_file.empty();
    const bool have_kernel = !src.kernel_text.empty();
    const bool have_group = !src.group_file.empty();
    if (have_table + have_kernel + have_group != 1)
        throw stabkit::validation_error(
            "exactly one of --table, --kernel, --group must be given");
    if (have_table) {
        const std::string text = slurp(src.table_file);
        digest.feed(text);
        return stabkit::parse_table_csv(text, src.table_file);
    }
    if (have_group) {
        const std::string text = slurp(src.group_file);
        digest.feed(text);
        return stabkit::from_group(stabkit::load_group(src.group_file));
    }
    if (src.x_file.empty() || src.y_file.empty())
        throw stabkit::validation_error("--kernel needs --x and --y point files");
    digest.feed(src.kernel_text);
    const std::string xtext = slurp(src.x_file), ytext = slurp(src.y_file);
    digest.feed(xtext);
    digest.feed(ytext);
    auto expr = stabkit::parse_kernel(src.kernel_text);
    return stabkit::sample_table(*expr,
                                 stabkit::parse_points_csv(xtext, src.x_file),
                                 stabkit::parse_points_csv(ytext, src.y_file));
}

// Targets: "row:i" strings from --target, files from --target-file holding a
// JSON array of numbers, {"row": i}, or a serialized type point
// {"values": [...], "columns_hash": "..."} whose hash, when present, must
// match the table it is joined with.
struct TargetInput {
    std::string name;
    stabkit::TargetSpec spec;
    std::string columns_hash; // empty when the input carried none
};

TargetInput parse_target_json(const json& j, const std::string& name) {
    TargetInput in;
    in.name = name;
    if (j.is_array()) {
        stabkit::TypePoint p;
        for (const auto& v : j) p.values.push_back(v.get<double>());
        in.spec = stabkit::TargetSpec::point(std::move(p));
        return in;
    }
    if (j.is_object() && j.contains("row")) {
        in.spec = stabkit::TargetSpec::row(j["row"].get<std::size_t>());
        return in;
    }
    if (j.is_object() && j.contains("values")) {
        stabkit::TypePoint p;
        for (const auto& v : j["values"]) p.values.push_back(v.get<double>());
        in.spec = stabkit::TargetSpec::point(std::move(p));
        if (j.contains("columns_hash"))
            in.columns_hash = j["columns_hash"].get<std::string>();
        return in;
    }
    throw stabkit::validation_error(
        "target must be a JSON array, {\"row\": index}, or "
        "{\"values\": [...], \"columns_hash\": ...}");
}

void check_target_join(const TargetInput& in, const stabkit::FormulaTable& t) {
    if (!in.columns_hash.empty() && in.columns_hash != stabkit::column_hash(t))
        throw stabkit::validation_error(
            "target " + in.name + " was produced for a different column set "
            "(columns_hash mismatch)");
}

std::vector<TargetInput> collect_targets(
    const std::vector<std::string>& target_args,
    const std::vector<std::string>& target_files,
    stabkit::InputDigest& digest) {
    std::vector<TargetInput> out;
    for (const auto& s : target_args) {
        if (s.rfind("row:", 0) != 0)
            throw stabkit::validation_error("--target expects row:<index>, got '" +
                                            s + "'");
        digest.feed(s);
        out.push_back({s, stabkit::TargetSpec::row(std::stoul(s.substr(4))), {}});
    }
    for (const auto& f : target_files) {
        const std::string text = slurp(f);
        digest.feed(text);
        json j;
        try {
            j = json::parse(text);
        } catch (const json::exception& e) {
            throw stabkit::parse_error(f + ": " + e.what(), 0, 0);
        }
        out.push_back(parse_target_json(j, f));
    }
    if (out.empty())
        throw stabkit::validation_error("no targets given");
    return out;
}

// Deterministic parallel map: results land by index regardless of the
// number of workers.
template <typename F>
void parallel_for(std::size_t n, unsigned jobs, F&& body) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> workers;
    const unsigned count = std::min<std::size_t>(jobs, n);
    std::exception_ptr first_error;
    std::mutex err_mu;
    for (unsigned w = 0; w < count; ++w) {
        workers.emplace_back([&, w]() {
            try {
                for (std::size_t i = w; i < n; i += count) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : workers) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

json table_summary(const stabkit::FormulaTable& t) {
    return json{{"rows", t.rows()},
                {"cols", t.cols()},
                {"boolean", t.is_boolean()},
                {"columns_hash", stabkit::column_hash(t)}};
}

// ----------------------------------------------------------------- analyze

int cmd_analyze(const GlobalOpts& g, const TableSource& src, double margin,
                std::vector<double> eps_grid, double dedup_tol,
                int exhaustive_max, std::size_t budget,
                stabkit::ReportBuilder& rb) {
    Timer t_load;
    const auto table = load_source(src, rb.digest());
    rb.stage_done("load", t_load.ms());

    json payload;
    payload["table"] = table_summary(table);
    payload["margin"] = margin;

    Timer t_ladder;
    const std::size_t min_dim = std::min(table.rows(), table.cols());
    int threshold = exhaustive_max;
    if (threshold < 0)
        threshold = (table.is_boolean() && margin == 1.0) ? 12 : 8;
    json ladder_json;
    ladder_json["threshold"] = threshold;
    if (min_dim <= static_cast<std::size_t>(threshold)) {
        const std::size_t idx = stabkit::ladder_index(table, margin);
        ladder_json["method"] = "exhaustive";
        ladder_json["exact"] = true;
        ladder_json["index"] = idx;
        if (idx > 0)
            ladder_json["witness"] =
                stabkit::to_json(*stabkit::find_ladder(table, idx, margin));
        else
            ladder_json["witness"] = nullptr;
    } else {
        auto best = stabkit::ladder_lower_bound(table, margin, g.seed, budget);
        ladder_json["method"] = "heuristic";
        ladder_json["exact"] = false;
        ladder_json["index"] = best ? best->length() : 0;
        ladder_json["witness"] = best ? stabkit::to_json(*best) : json(nullptr);
        ladder_json["budget"] = budget;
    }
    payload["ladder"] = ladder_json;
    rb.stage_done("ladder", t_ladder.ms());

    Timer t_types;
    const auto types = stabkit::realized_types(table, dedup_tol);
    json multiplicities = json::array();
    for (const auto& rt : types) multiplicities.push_back(rt.multiplicity());
    payload["types"] = json{{"dedup_tol", dedup_tol},
                            {"count", types.size()},
                            {"multiplicities", multiplicities}};

    json density = json::array();
    for (double eps : eps_grid) {
        const auto d = stabkit::density_character(table, eps);
        density.push_back(json{{"eps", eps}, {"size", d.size}, {"exact", d.exact}});
    }
    payload["density"] = density;
    rb.stage_done("types", t_types.ms());

    rb.set_payload(payload);
    if (!g.quiet) {
        std::cout << "table: " << table.rows() << "x" << table.cols()
                  << (table.is_boolean() ? " (boolean)" : "") << "\n";
        std::cout << "ladder index (margin " << margin
                  << "): " << ladder_json["index"].get<std::size_t>() << " ["
                  << ladder_json["method"].get<std::string>() << "]\n";
        std::cout << "realized types (tol " << dedup_tol << "): " << types.size()
                  << "\n";
        for (const auto& d : density)
            std::cout << "density eps=" << d["eps"].get<double>() << ": "
                      << d["size"].get<std::size_t>()
                      << (d["exact"].get<bool>() ? " (exact)" : " (upper bound)")
                      << "\n";
    }
    return 0;
}

// ------------------------------------------------------------------ define

int cmd_define(const GlobalOpts& g, const TableSource& src,
               const std::vector<std::string>& target_args,
               const std::vector<std::string>& target_files,
               const std::string& mode, double tol, std::size_t rounds,
               std::size_t k_max, stabkit::ReportBuilder& rb) {
    Timer t_load;
    const auto table = load_source(src, rb.digest());
    const auto targets = collect_targets(target_args, target_files, rb.digest());
    rb.stage_done("load", t_load.ms());

    const bool want_lp = mode == "lp" || mode == "all";
    const bool want_greedy = mode == "greedy" || mode == "all";
    const bool want_majority = mode == "majority" || mode == "all";

    if (mode == "majority" && !table.is_boolean())
        throw stabkit::validation_error(
            "majority definitions require a Boolean table");

    const std::string table_hash = stabkit::column_hash(table);
    for (const auto& in : targets) check_target_join(in, table);

    Timer t_def;
    std::vector<json> records(targets.size());
    parallel_for(targets.size(), g.jobs, [&](std::size_t i) {
        const auto& name = targets[i].name;
        const auto& spec = targets[i].spec;
        json rec;
        rec["target"] = name;
        rec["target_point"] = stabkit::type_point_to_json(
            stabkit::resolve_target(table, spec), table_hash);
        if (want_lp) {
            const auto def = stabkit::lp_define(table, spec);
            const auto check = stabkit::verify_definition(table, def, spec, tol);
            rec["lp"] = stabkit::to_json(def);
            rec["lp"]["verified"] = check.ok;
        }
        if (want_greedy) {
            const auto def = stabkit::greedy_define(table, spec, rounds);
            const auto check = stabkit::verify_definition(table, def, spec, tol);
            rec["greedy"] = stabkit::to_json(def);
            rec["greedy"]["verified"] = check.ok;
            rec["greedy"]["rounds"] = rounds;
        }
        if (want_majority) {
            const bool applicable =
                table.is_boolean() &&
                [&] {
                    const auto p = stabkit::resolve_target(table, spec);
                    for (double v : p.values)
                        if (v != 0.0 && v != 1.0) return false;
                    return true;
                }();
            if (mode == "majority" && !applicable)
                throw stabkit::validation_error(
                    "majority definitions require a {0,1} target");
            if (applicable) {
                auto def = stabkit::majority_define(table, spec, k_max);
                if (def) {
                    const auto check =
                        stabkit::verify_definition(table, *def, spec, tol);
                    rec["majority"] = stabkit::to_json(*def);
                    rec["majority"]["verified"] = check.ok;
                } else {
                    rec["majority"] = nullptr; // no definition within k_max
                }
            }
        }
        records[i] = std::move(rec);
    });
    rb.stage_done("define", t_def.ms());

    json payload;
    payload["table"] = table_summary(table);
    payload["mode"] = mode;
    payload["tol"] = tol;
    payload["k_max"] = k_max;
    payload["targets"] = records;
    rb.set_payload(payload);

    if (!g.quiet) {
        for (const auto& rec : records) {
            std::cout << rec["target"].get<std::string>() << ":";
            if (rec.contains("lp"))
                std::cout << " lp_error=" << rec["lp"]["sup_error"].get<double>();
            if (rec.contains("greedy"))
                std::cout << " greedy_error="
                          << rec["greedy"]["sup_error"].get<double>();
            if (rec.contains("majority")) {
                if (rec["majority"].is_null())
                    std::cout << " majority=none";
                else
                    std::cout << " majority_k="
                              << rec["majority"]["k"].get<std::size_t>();
            }
            std::cout << "\n";
        }
    }
    return 0;
}

// ------------------------------------------------------------- doublelimit

int cmd_doublelimit(const GlobalOpts& g, const std::string& kernel_text,
                    const std::string& x_file, const std::string& y_file,
                    int window, double tol, bool monotone,
                    stabkit::ReportBuilder& rb) {
    Timer t_all;
    rb.digest().feed(kernel_text);
    const std::string xtext = slurp(x_file), ytext = slurp(y_file);
    rb.digest().feed(xtext);
    rb.digest().feed(ytext);
    auto expr = stabkit::parse_kernel(kernel_text);
    const auto xs = stabkit::parse_points_csv(xtext, x_file);
    const auto ys = stabkit::parse_points_csv(ytext, y_file);
    const auto rep = monotone
                         ? stabkit::ladder_to_gap(*expr, xs, ys, window, tol)
                         : stabkit::double_limit(*expr, xs, ys, window, tol);
    rb.stage_done("doublelimit", t_all.ms());

    json payload;
    payload["kernel"] = stabkit::print_kernel(*expr);
    payload["report"] = stabkit::to_json(rep);
    rb.set_payload(payload);

    if (!g.quiet) {
        auto show = [](const std::optional<double>& v) {
            return v ? std::to_string(*v) : std::string("not-converged");
        };
        std::cout << "lim_n lim_m = " << show(rep.limit_nm) << "\n";
        std::cout << "lim_m lim_n = " << show(rep.limit_mn) << "\n";
        std::cout << "gap = " << show(rep.gap) << "\n";
    }
    return 0;
}

// ----------------------------------------------------------------- uniform

int cmd_uniform(const GlobalOpts& g, const std::string& manifest_file,
                std::size_t k_max, stabkit::ReportBuilder& rb) {
    Timer t_all;
    const std::string text = slurp(manifest_file);
    rb.digest().feed(text);
    json manifest;
    try {
        manifest = json::parse(text);
    } catch (const json::exception& e) {
        throw stabkit::parse_error(manifest_file + ": " + e.what(), 0, 0);
    }
    if (!manifest.is_array())
        throw stabkit::validation_error("manifest must be a JSON array");

    std::vector<std::pair<stabkit::FormulaTable, std::vector<stabkit::TargetSpec>>>
        instances;
    json instance_names = json::array();
    for (const auto& entry : manifest) {
        const std::string table_path = entry.at("table").get<std::string>();
        const std::string ttext = slurp(table_path);
        rb.digest().feed(ttext);
        auto table = stabkit::parse_table_csv(ttext, table_path);
        std::vector<stabkit::TargetSpec> targets;
        for (const auto& tj : entry.at("targets")) {
            TargetInput in;
            if (tj.is_string()) {
                const std::string fname = tj.get<std::string>();
                const std::string ftext = slurp(fname);
                rb.digest().feed(ftext);
                try {
                    in = parse_target_json(json::parse(ftext), fname);
                } catch (const json::exception& e) {
                    throw stabkit::parse_error(fname + ": " + e.what(), 0, 0);
                }
            } else {
                in = parse_target_json(tj, table_path + " inline target");
            }
            check_target_join(in, table);
            targets.push_back(std::move(in.spec));
        }
        instance_names.push_back(table_path);
        instances.emplace_back(std::move(table), std::move(targets));
    }

    const auto res = stabkit::uniform_majority_bound(instances, k_max);
    rb.stage_done("uniform", t_all.ms());

    json payload;
    payload["k_max"] = k_max;
    payload["instances"] = instance_names;
    payload["per_target_k"] = res.per_target_k;
    payload["k"] = res.k ? json(*res.k) : json(nullptr);
    if (res.failure)
        payload["failure"] = json{{"instance", res.failure->instance},
                                  {"target", res.failure->target}};
    else
        payload["failure"] = nullptr;
    rb.set_payload(payload);

    if (!g.quiet) {
        if (res.k)
            std::cout << "uniform majority size k = " << *res.k << "\n";
        else if (res.failure)
            std::cout << "no uniform k <= " << k_max << " (instance "
                      << res.failure->instance << ", target "
                      << res.failure->target << " fails)\n";
        else
            std::cout << "no uniform k <= " << k_max << "\n";
    }
    return 0;
}

// ------------------------------------------------------------------ kernel

int cmd_kernel(const GlobalOpts& g, const std::string& expr_text, bool sample,
               const std::string& x_file, const std::string& y_file,
               const std::string& out_file, stabkit::ReportBuilder& rb) {
    Timer t_all;
    rb.digest().feed(expr_text);
    auto expr = stabkit::parse_kernel(expr_text);
    const std::string canonical = stabkit::print_kernel(*expr);

    json payload;
    payload["canonical"] = canonical;
    if (sample) {
        if (x_file.empty() || y_file.empty())
            throw stabkit::validation_error("--sample needs --x and --y");
        const std::string xtext = slurp(x_file), ytext = slurp(y_file);
        rb.digest().feed(xtext);
        rb.digest().feed(ytext);
        const auto table = stabkit::sample_table(
            *expr, stabkit::parse_points_csv(xtext, x_file),
            stabkit::parse_points_csv(ytext, y_file));
        const std::string csv = stabkit::table_to_csv(table);
        payload["table"] = table_summary(table);
        if (!out_file.empty()) {
            std::ofstream out(out_file, std::ios::binary);
            if (!out)
                throw stabkit::validation_error("cannot write " + out_file);
            out << csv;
        } else if (!g.quiet) {
            std::cout << csv;
        }
    } else if (!g.quiet) {
        std::cout << canonical << "\n";
    }
    rb.stage_done("kernel", t_all.ms());
    rb.set_payload(payload);
    return 0;
}

void write_report(const GlobalOpts& g, const stabkit::ReportBuilder& rb) {
    if (g.json_out.empty()) return;
    std::ofstream out(g.json_out, std::ios::binary);
    if (!out)
        throw stabkit::validation_error("cannot write report to " + g.json_out);
    out << rb.finish().dump(2) << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"stability analysis of finite [0,1]-valued formula tables"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand

    GlobalOpts g;
    app.add_option("--seed", g.seed, "seed for randomized searches");
    app.add_option("--jobs", g.jobs, "worker threads for batch work");
    app.add_option("--json", g.json_out, "write the JSON report here");
    app.add_flag("--quiet", g.quiet, "suppress human-readable output");

    TableSource src;
    auto add_source = [&](CLI::App* cmd) {
        cmd->add_option("--table", src.table_file, "table CSV file");
        cmd->add_option("--kernel", src.kernel_text, "kernel expression");
        cmd->add_option("--x", src.x_file, "x-side points CSV");
        cmd->add_option("--y", src.y_file, "y-side points CSV");
        cmd->add_option("--group", src.group_file, "group function JSON");
    };

    // analyze
    auto* analyze = app.add_subcommand("analyze", "ladder index, types, density");
    double margin = 1.0, dedup_tol = 0.0;
    std::vector<double> eps_grid;
    int exhaustive_max = -1;
    std::size_t budget = 256;
    add_source(analyze);
    analyze->add_option("TABLE", src.table_file, "table CSV file (positional)");
    analyze->add_option("--margin", margin, "ladder margin delta in (0,1]");
    analyze->add_option("--eps", eps_grid, "epsilon grid for density character");
    analyze->add_option("--dedup-tol", dedup_tol, "type dedup tolerance");
    analyze->add_option("--exhaustive-max", exhaustive_max,
                        "largest min-dimension searched exhaustively");
    analyze->add_option("--budget", budget, "heuristic attempt budget");

    // define
    auto* define = app.add_subcommand("define", "defining predicates for types");
    std::vector<std::string> target_args, target_files;
    std::string mode = "all";
    double tol = 1e-6;
    std::size_t rounds = 1000, k_max = 5;
    add_source(define);
    define->add_option("TABLE", src.table_file, "table CSV file (positional)");
    define->add_option("--target", target_args, "row:<index> target");
    define->add_option("--target-file", target_files,
                       "JSON target file (array or {\"row\": i})");
    define->add_option("--mode", mode, "lp|greedy|majority|all")
        ->check(CLI::IsMember({"lp", "greedy", "majority", "all"}));
    define->add_option("--tol", tol, "verification tolerance");
    define->add_option("--rounds", rounds, "greedy averaging rounds");
    define->add_option("--k-max", k_max, "largest odd majority size");

    // doublelimit
    auto* dl = app.add_subcommand("doublelimit", "iterated double limits");
    std::string dl_kernel, dl_x, dl_y;
    int window = 5;
    double dl_tol = 1e-2;
    bool monotone = false;
    dl->add_option("--kernel", dl_kernel, "kernel expression")->required();
    dl->add_option("--x", dl_x, "x sequence CSV")->required();
    dl->add_option("--y", dl_y, "y sequence CSV")->required();
    dl->add_option("--window", window, "convergence window");
    dl->add_option("--tol", dl_tol, "convergence tolerance");
    dl->add_flag("--monotone", monotone,
                 "require strictly monotone 1-d sequences");

    // uniform
    auto* uni = app.add_subcommand("uniform", "uniform majority size over instances");
    std::string manifest;
    std::size_t uni_k_max = 5;
    uni->add_option("--manifest", manifest, "JSON manifest of instances")
        ->required();
    uni->add_option("--k-max", uni_k_max, "largest odd majority size");

    // kernel
    auto* ker = app.add_subcommand("kernel", "parse, print and sample kernels");
    std::string ker_expr, ker_x, ker_y, ker_out;
    bool ker_sample = false;
    ker->add_option("--expr", ker_expr, "kernel expression")->required();
    ker->add_flag("--sample", ker_sample, "sample a table from point files");
    ker->add_option("--x", ker_x, "x-side points CSV");
    ker->add_option("--y", ker_y, "y-side points CSV");
    ker->add_option("--out", ker_out, "write sampled table CSV here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    std::vector<std::string> argv_echo(argv + 1, argv + argc);
    stabkit::ReportBuilder rb(app.get_subcommands().front()->get_name(),
                              argv_echo, g.seed);

    try {
        int rc = 0;
        if (analyze->parsed()) {
            if (eps_grid.empty()) eps_grid = {0.5, 0.25, 0.1};
            rc = cmd_analyze(g, src, margin, eps_grid, dedup_tol, exhaustive_max,
                             budget, rb);
        } else if (define->parsed()) {
            rc = cmd_define(g, src, target_args, target_files, mode, tol, rounds,
                            k_max, rb);
        } else if (dl->parsed()) {
            rc = cmd_doublelimit(g, dl_kernel, dl_x, dl_y, window, dl_tol,
                                 monotone, rb);
        } else if (uni->parsed()) {
            rc = cmd_uniform(g, manifest, uni_k_max, rb);
        } else if (ker->parsed()) {
            rc = cmd_kernel(g, ker_expr, ker_sample, ker_x, ker_y, ker_out, rb);
        }
        write_report(g, rb);
        return rc;
    } catch (const stabkit::parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const stabkit::validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const stabkit::numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
