// rootiter: run high-order root-finding methods at arbitrary precision,
// reproduce the benchmark tables, and certify convergence orders symbolically.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rootiter/bigreal.hpp"
#include "rootiter/diagnostics.hpp"
#include "rootiter/funcsuite.hpp"
#include "rootiter/orderlab/families.hpp"
#include "rootiter/schemes.hpp"

namespace {

using namespace rootiter;

constexpr int kExitOk = 0;
constexpr int kExitCertFail = 1;
constexpr int kExitDivergent = 2;
constexpr int kExitError = 3;
constexpr int kExitUsage = 64;

struct Options {
    long bits = 4096;
    long tnfe = 12;
    std::string format = "text";
    std::string out;
    std::string method;
    std::string function;
    std::string expr;
    std::string x0;
    std::string kappa;
    std::string config_path;
    int table = 0;
    std::string family;
    std::string conditions = "base";
    int truncation = 0;
    std::string list_what = "methods";
};

/// Flat key=value configuration file; '#' starts a comment.
std::map<std::string, std::string> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            size_t b = s.find_first_not_of(" \t\r");
            size_t e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (!key.empty()) kv[key] = value;
    }
    return kv;
}

/// Precedence: command-line flag > config file > environment default > builtin.
void apply_config(Options& o, const std::map<std::string, CLI::Option*>& flags) {
    if (o.config_path.empty()) return;
    auto kv = read_config(o.config_path);
    auto unset = [&](const char* name) {
        auto it = flags.find(name);
        return it == flags.end() || it->second->count() == 0;
    };
    if (kv.count("bits") && unset("bits")) o.bits = std::stol(kv["bits"]);
    if (kv.count("tnfe") && unset("tnfe")) o.tnfe = std::stol(kv["tnfe"]);
    if (kv.count("format") && unset("format")) o.format = kv["format"];
    if (kv.count("out") && unset("out")) o.out = kv["out"];
    if (kv.count("method") && unset("method")) o.method = kv["method"];
    if (kv.count("function") && unset("function")) o.function = kv["function"];
    if (kv.count("expr") && unset("expr")) o.expr = kv["expr"];
    if (kv.count("x0") && unset("x0")) o.x0 = kv["x0"];
    if (kv.count("kappa") && unset("kappa")) o.kappa = kv["kappa"];
    if (kv.count("table") && unset("table")) o.table = std::stoi(kv["table"]);
}

struct OutputSink {
    std::ofstream file;
    std::ostream* os = &std::cout;
    explicit OutputSink(const std::string& path) {
        if (!path.empty()) {
            file.open(path);
            if (!file) throw Error("cannot open output file: " + path);
            os = &file;
        }
    }
    std::ostream& stream() { return *os; }
};

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

int cmd_solve(const Options& o) {
    PrecisionContext ctx(o.bits);
    std::optional<TestFunction> fn;
    BigReal x0(ctx);
    bool have_alpha = true;

    if (!o.function.empty()) {
        for (TestFunction& f : builtin_suite(ctx))
            if (f.id == o.function) fn.emplace(std::move(f));
        if (!fn) {
            std::cerr << "unknown function: " << o.function << "\n";
            return kExitUsage;
        }
        x0 = o.x0.empty() ? fn->default_x0 : parse_decimal(o.x0, ctx);
    } else if (!o.expr.empty()) {
        if (o.x0.empty()) {
            std::cerr << "--expr requires --x0\n";
            return kExitUsage;
        }
        x0 = parse_decimal(o.x0, ctx);
        ExprPtr body = parse_expression(o.expr);
        ExprPtr deriv = differentiate(body);
        BigReal root = x0;
        try {
            root = refine_root(body, deriv, x0, ctx.decimal_digits() - 10);
        } catch (const Error&) {
            have_alpha = false; // report residual-based status only
        }
        fn.emplace("expr", body, root, x0);
    } else {
        std::cerr << "one of --function or --expr is required\n";
        return kExitUsage;
    }

    MethodScheme m = builtin_method(o.method);
    Params overrides;
    if (!o.kappa.empty()) overrides.emplace("kappa", parse_decimal(o.kappa, ctx));
    IterationTrace trace = iterate(m, *fn, x0, o.tnfe, overrides);
    RunReport report = classify(trace, fn->reference_root, m.name, fn->id);

    OutputSink sink(o.out);
    std::ostream& os = sink.stream();
    os << "method " << m.name << "  function " << fn->id << "  x0 " << format_scientific(x0, 6)
       << "\n";
    for (size_t i = 0; i < trace.iterates.size(); ++i)
        os << "iter " << i << ": " << format_scientific(trace.iterates[i], 30) << "\n";
    os << "status " << to_string(trace.status) << "  tnfe " << trace.tnfe_used << "\n";
    if (have_alpha) {
        std::string err = report.error_underflow ? "0"
                          : report.final_abs_error
                              ? format_scientific(*report.final_abs_error, 3)
                              : "X";
        os << "|error| " << err << "\n";
        os << "coc " << render_coc_cell(report) << "\n";
    } else {
        BigReal r = evaluate_expr(fn->body, trace.iterates.back());
        os << "|residual| " << (r.is_zero() ? "0" : format_scientific(abs(r), 3)) << "\n";
        os << "coc X\n";
    }
    switch (trace.status) {
        case RunStatus::Converged:
        case RunStatus::BudgetExhausted: return kExitOk;
        case RunStatus::Divergent: return kExitDivergent;
        default: return kExitError;
    }
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

enum class TableKind { Error, Coc, ErrorAndCoc, ErrorKappaCoc };

struct TableSpec {
    int id;
    TableKind kind;
    std::vector<std::string> methods;
};

const TableSpec* table_spec(int id) {
    static const std::vector<TableSpec> tables = {
        {2, TableKind::Error, {"FD1-M1", "SG", "NT1", "NT2", "CH", "GR", "AL"}},
        {3, TableKind::Coc, {"FD1-M1", "SG", "NT1", "NT2", "CH", "GR", "AL"}},
        {4, TableKind::ErrorAndCoc, {"FD1-M2", "FD2-M1", "AL1"}},
        {5, TableKind::Error,
         {"FD4", "FD5", "FD6", "TS1", "TS2", "SK2M1", "SK2M2", "FS1", "FS2"}},
        {6, TableKind::Coc, {"FD4", "FD5", "FD6", "TS1", "TS2", "SK2M1", "SK2M2", "FS1", "FS2"}},
        {7, TableKind::ErrorKappaCoc, {"FD7", "FS3-1", "FS3-2", "FS4-1", "FS4-2"}},
    };
    for (const TableSpec& t : tables)
        if (t.id == id) return &t;
    return nullptr;
}

/// FD7 runs each row with its published kappa: 1 for f1, -1 for f10, 1/100
/// elsewhere.
std::string table7_kappa(const std::string& function_id) {
    if (function_id == "f1") return "1.0";
    if (function_id == "f10") return "-1.0";
    return "0.01";
}

struct BenchCell {
    std::string function, method, kappa;
    RunReport report;
};

std::vector<BenchCell> run_table(const TableSpec& spec, const Options& o) {
    PrecisionContext ctx(o.bits);
    std::vector<TestFunction> suite = builtin_suite(ctx);
    std::vector<BenchCell> cells;
    for (const TestFunction& f : suite) {
        for (const std::string& name : spec.methods) {
            MethodScheme m = builtin_method(name);
            Params overrides;
            std::string kappa = o.kappa;
            if (spec.id == 7 && name == "FD7" && kappa.empty()) kappa = table7_kappa(f.id);
            if (!kappa.empty() && m.kind == MethodKind::DerivativeFree)
                overrides.emplace("kappa", parse_decimal(kappa, ctx));
            else
                kappa.clear();
            IterationTrace trace = iterate(m, f, f.default_x0, o.tnfe, overrides);
            cells.push_back({f.id, name, kappa, classify(trace, f.reference_root, name, f.id)});
        }
    }
    return cells;
}

std::string cell_text(const TableSpec& spec, const BenchCell& c) {
    switch (spec.kind) {
        case TableKind::Error: return render_error_cell(c.report);
        case TableKind::Coc: return render_coc_cell(c.report);
        case TableKind::ErrorAndCoc:
            return render_error_cell(c.report) + " (" + render_coc_cell(c.report) + ")";
        case TableKind::ErrorKappaCoc: {
            std::string s = render_error_cell(c.report);
            if (!c.kappa.empty()) s += " (" + c.kappa + ")";
            return s + " (" + render_coc_cell(c.report) + ")";
        }
    }
    return "X";
}

void render_text(std::ostream& os, const TableSpec& spec, const std::vector<BenchCell>& cells) {
    size_t ncols = spec.methods.size();
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header{"function"};
    header.insert(header.end(), spec.methods.begin(), spec.methods.end());
    rows.push_back(header);
    for (size_t i = 0; i < cells.size(); i += ncols) {
        std::vector<std::string> row{cells[i].function};
        for (size_t j = 0; j < ncols; ++j) row.push_back(cell_text(spec, cells[i + j]));
        rows.push_back(std::move(row));
    }
    std::vector<size_t> width(ncols + 1, 0);
    for (const auto& row : rows)
        for (size_t j = 0; j < row.size(); ++j) width[j] = std::max(width[j], row[j].size());
    os << "table " << spec.id << "\n";
    for (const auto& row : rows) {
        for (size_t j = 0; j < row.size(); ++j) {
            os << row[j];
            if (j + 1 < row.size()) os << std::string(width[j] - row[j].size() + 2, ' ');
        }
        os << "\n";
    }
}

void render_csv(std::ostream& os, const TableSpec& spec, const std::vector<BenchCell>& cells) {
    os << "function";
    for (const std::string& m : spec.methods) os << "," << m;
    os << "\n";
    size_t ncols = spec.methods.size();
    for (size_t i = 0; i < cells.size(); i += ncols) {
        os << cells[i].function;
        for (size_t j = 0; j < ncols; ++j) os << "," << cell_text(spec, cells[i + j]);
        os << "\n";
    }
}

void render_records(std::ostream& os, const TableSpec& spec, const std::vector<BenchCell>& cells,
                    const Options& o) {
    for (const BenchCell& c : cells) {
        const RunReport& r = c.report;
        os << "table=" << spec.id << " function=" << c.function << " method=" << c.method;
        if (!c.kappa.empty()) os << " kappa=" << c.kappa;
        os << " bits=" << o.bits << " tnfe=" << r.tnfe_used << " status=" << to_string(r.status);
        os << " error=" << render_error_cell(r);
        os << " coc=" << render_coc_cell(r) << "\n";
    }
}

int cmd_bench(const Options& o) {
    const TableSpec* spec = table_spec(o.table);
    if (!spec) {
        std::cerr << "unknown table: " << o.table << " (expected 2-7)\n";
        return kExitUsage;
    }
    std::vector<BenchCell> cells = run_table(*spec, o);
    OutputSink sink(o.out);
    if (o.format == "text")
        render_text(sink.stream(), *spec, cells);
    else if (o.format == "csv")
        render_csv(sink.stream(), *spec, cells);
    else if (o.format == "records")
        render_records(sink.stream(), *spec, cells, o);
    else {
        std::cerr << "unknown format: " << o.format << "\n";
        return kExitUsage;
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// verify-order
// ---------------------------------------------------------------------------

int cmd_verify_order(const Options& o) {
    namespace ol = orderlab;
    std::vector<std::string> families = ol::family_names();
    if (std::find(families.begin(), families.end(), o.family) == families.end()) {
        std::cerr << "unknown family: " << o.family << "\n";
        return kExitUsage;
    }
    ol::ConditionSet cond;
    if (o.conditions == "none")
        cond = ol::ConditionSet::None;
    else if (o.conditions == "base")
        cond = ol::ConditionSet::Base;
    else if (o.conditions == "seventh")
        cond = ol::ConditionSet::Seventh;
    else {
        std::cerr << "unknown condition set: " << o.conditions << "\n";
        return kExitUsage;
    }
    int claimed = ol::claimed_order(o.family, cond);
    OutputSink sink(o.out);
    std::ostream& os = sink.stream();
    os << "family " << o.family << "  conditions " << o.conditions << "\n";
    try {
        ol::OrderCertificate cert = ol::verify_family(o.family, cond, o.truncation);
        os << "truncation e^" << cert.truncation << ", coefficients checked through e^"
           << cert.checked_through << "\n";
        for (const std::string& line : cert.coefficient_lines) os << "  " << line << "\n";
        os << "certified order " << cert.order << "\n";
        if (claimed > 0) {
            os << "claimed order " << claimed << ": "
               << (cert.order >= claimed ? "PASS" : "FAIL") << "\n";
            return cert.order >= claimed ? kExitOk : kExitCertFail;
        }
        os << "no order claim under these conditions\n";
        return kExitOk;
    } catch (const TruncationTooLow& e) {
        os << "certification failed: " << e.what() << "\n";
        return kExitCertFail;
    }
}

// ---------------------------------------------------------------------------
// list
// ---------------------------------------------------------------------------

int cmd_list(const Options& o) {
    OutputSink sink(o.out);
    std::ostream& os = sink.stream();
    PrecisionContext ctx(128);
    if (o.list_what == "methods") {
        os << "name      p  d  efficiency  parameters\n";
        for (const std::string& name : method_names()) {
            MethodScheme m = builtin_method(name);
            std::string eff =
                format_scientific(efficiency_index(m.claimed_order, m.evals_per_iteration, ctx), 5);
            os << name << std::string(name.size() < 10 ? 10 - name.size() : 1, ' ')
               << m.claimed_order << "  " << m.evals_per_iteration << "  " << eff << "      ";
            bool first = true;
            for (const auto& [k, v] : m.param_defaults) {
                if (!first) os << ", ";
                os << k << "=" << v;
                first = false;
            }
            if (m.param_defaults.empty()) os << "-";
            os << "\n";
        }
        return kExitOk;
    }
    if (o.list_what == "functions") {
        PrecisionContext fctx(256);
        os << "id    x0     root              expression\n";
        for (const TestFunction& f : builtin_suite(fctx)) {
            os << f.id << std::string(f.id.size() < 6 ? 6 - f.id.size() : 1, ' ')
               << format_scientific(f.default_x0, 3) << "  "
               << format_scientific(f.reference_root, 12) << "  " << f.source << "\n";
        }
        return kExitOk;
    }
    std::cerr << "unknown listing: " << o.list_what << " (expected methods|functions)\n";
    return kExitUsage;
}

} // namespace

int main(int argc, char** argv) {
    Options o;
    if (const char* env_bits = std::getenv("ROOTITER_BITS")) o.bits = std::atol(env_bits);

    CLI::App app{"High-order multipoint root-finding lab"};
    app.require_subcommand(1);
    std::map<std::string, CLI::Option*> flags;

    auto add_common = [&](CLI::App* sub) {
        flags["bits"] = sub->add_option("--bits", o.bits, "working precision in bits");
        flags["tnfe"] = sub->add_option("--tnfe", o.tnfe, "total function-evaluation budget");
        flags["out"] = sub->add_option("--out", o.out, "write output to a file");
        sub->add_option("--config", o.config_path, "flat key=value config file");
    };

    CLI::App* solve = app.add_subcommand("solve", "run one method on one function");
    solve->add_option("--method", o.method, "method name (see: list)")->required();
    flags["function"] = solve->add_option("--function", o.function, "builtin function id (f1..f12)");
    flags["expr"] = solve->add_option("--expr", o.expr, "expression in x");
    flags["x0"] = solve->add_option("--x0", o.x0, "starting point");
    flags["kappa"] = solve->add_option("--kappa", o.kappa, "kappa for derivative-free methods");
    add_common(solve);

    CLI::App* bench = app.add_subcommand("bench", "reproduce a benchmark table");
    flags["table"] = bench->add_option("--table", o.table, "table id (2-7)");
    bench->add_option("--format", o.format, "text|csv|records");
    bench->add_option("--kappa", o.kappa, "kappa override for derivative-free methods");
    add_common(bench);

    CLI::App* verify = app.add_subcommand("verify-order", "symbolic convergence-order certificate");
    verify->add_option("--family", o.family, "family name (NM, FD1..FD6)")->required();
    verify->add_option("--conditions", o.conditions, "none|base|seventh");
    verify->add_option("--truncation", o.truncation, "series truncation override");
    verify->add_option("--out", o.out, "write output to a file");

    CLI::App* list = app.add_subcommand("list", "show registered methods or functions");
    list->add_option("what", o.list_what, "methods|functions");
    list->add_option("--out", o.out, "write output to a file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        apply_config(o, flags);
        if (solve->parsed()) return cmd_solve(o);
        if (bench->parsed()) return cmd_bench(o);
        if (verify->parsed()) return cmd_verify_order(o);
        if (list->parsed()) return cmd_list(o);
    } catch (const UnknownMethod& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitError;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kExitError;
    }
    return kExitUsage;
}
