#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#include "commands.hpp"

namespace fs = std::filesystem;
using namespace schatlab;
using namespace schatlab::cli;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_usage = 2;
constexpr int exit_numerical = 3;

/// Reads key=value lines; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw usage_error("cannot open config file '" + path + "'");
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos)
            line.resize(h);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw usage_error(path + ":" + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(line.substr(0, eq));
        std::replace(key.begin(), key.end(), '_', '-');
        if (key.empty())
            throw usage_error(path + ":" + std::to_string(lineno) + ": empty key");
        out.emplace_back(key, trim(line.substr(eq + 1)));
    }
    return out;
}

/// Appends config entries as flags for every key not given on the command
/// line, so explicit flags win.
std::vector<std::string> expand_config(std::vector<std::string> args)
{
    std::string config_path;
    std::set<std::string> given;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const auto& a = args[i];
        if (a.rfind("--", 0) != 0)
            continue;
        const auto eq = a.find('=');
        const std::string name = a.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
        given.insert(name);
        if (name == "config") {
            if (eq != std::string::npos)
                config_path = a.substr(eq + 1);
            else if (i + 1 < args.size())
                config_path = args[i + 1];
            else
                throw usage_error("--config needs a path");
        }
    }
    if (config_path.empty())
        return args;
    for (const auto& [key, value] : read_config(config_path)) {
        if (key == "config")
            throw usage_error("config files cannot include other config files");
        if (given.count(key))
            continue;
        if (key == "reproducible") {
            if (value == "true" || value == "1" || value.empty())
                args.push_back("--reproducible");
            else if (value != "false" && value != "0")
                throw usage_error("reproducible must be true or false");
            continue;
        }
        args.push_back("--" + key);
        args.push_back(value);
    }
    return args;
}

void write_atomic(const std::string& path, const std::string& text)
{
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw io_error("cannot write '" + path + "'");
        out << text;
        if (!out.flush())
            throw io_error("cannot write '" + path + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec)
        throw io_error("cannot write '" + path + "': " + ec.message());
}

std::string csv_text(const std::vector<std::pair<double, double>>& rows)
{
    std::string out;
    char buf[64];
    for (const auto& [x, y] : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", x, y);
        out += buf;
    }
    return out;
}

void add_kernel_options(CLI::App* sub, KernelOptions& k)
{
    sub->add_option("--kernel", k.kind, "rank-one | conv-power | conv-table | product-random | mode-sum | carleman")
        ->check(CLI::IsMember({"rank-one", "conv-power", "conv-table", "product-random", "mode-sum", "carleman"}));
    sub->add_option("--n", k.n, "torus dimension (1 or 2)")->check(CLI::IsMember({1, 2}));
    sub->add_option("--a", k.a, "decay exponent (conv-power, product-random x side)");
    sub->add_option("--b", k.b, "decay exponent (product-random y side)");
    sub->add_option("--table", k.table, "conv-table symbol, e.g. 0:1,1:0.5,-1:0.5 or 1/0:0.5@0.1 on T^2");
    sub->add_option("--coeffs", k.coeffs, "coefficient CSV for mode-sum");
    sub->add_option("--corrupt", k.corrupt, "redefine the kernel on the diagonal to this value");
    sub->add_option("--corrupt-im", k.corrupt_im, "imaginary part of the diagonal value");
    sub->add_option("--p-demo", k.p_demo, "Schatten exponent carried by the carleman kernel");
    sub->add_option("--log-shift", k.log_shift, "shift A in the carleman coefficients")->check(CLI::NonNegativeNumber);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Schatten-class diagnostics for integral operators on tori and SU(2)", "schatlab"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", version);

    CommonOptions common;
    std::string out_path, csv_path, config_path;
    app.add_option("--out", out_path, "write the JSON report here instead of stdout");
    app.add_option("--csv", csv_path, "write two-column plot data here");
    app.add_option("--seed", common.seed, "seed for randomised kernels");
    app.add_flag("--reproducible", common.reproducible, "omit the timestamp from the report");
    app.add_option("--config", config_path, "key=value file; flags given on the command line take precedence");

    AnalyzeOptions analyze;
    auto* a = app.add_subcommand("analyze", "Sobolev norms, Schatten prediction, spectrum and traces of a kernel");
    add_kernel_options(a, analyze.kernel);
    a->add_option("--cutoff", analyze.cutoff, "frequency cutoff N (default 1024 on T^1, 24 on T^2)");
    a->add_option("--mu1", analyze.mu1, "regularity order in x");
    a->add_option("--mu2", analyze.mu2, "regularity order in y");
    a->add_option("--p", analyze.ps, "Schatten exponents")->delimiter(',');
    a->add_option("--spectral-cutoff", analyze.spectral_cutoff,
                  "cutoff for the dense SVD of non-convolution kernels (default min(N,256) on T^1, min(N,12) on T^2)");
    a->add_option("--jmax", analyze.jmax, "finest dyadic level for the averaged trace");

    TraceOptions trace;
    auto* t = app.add_subcommand("trace", "eigenvalue, naive and dyadically averaged traces on T^1");
    add_kernel_options(t, trace.kernel);
    t->add_option("--cutoff", trace.cutoff, "frequency cutoff");
    t->add_option("--grid", trace.grid, "quadrature points (default 2N+1)");
    t->add_option("--jmax", trace.jmax, "finest dyadic level");

    PowersOptions powers;
    auto* pw = app.add_subcommand("powers", "Schatten membership of (I + E)^(-alpha) for a model operator E on a torus");
    pw->add_option("--model", powers.model, "torus-laplacian | torus-bilaplacian");
    pw->add_option("--n", powers.n, "torus dimension (1 or 2)");
    pw->add_option("--alpha", powers.alpha, "power");
    pw->add_option("--p", powers.p, "Schatten exponent");
    pw->add_option("--cutoff", powers.cutoff, "also report the partial sum at this frequency cutoff");

    Su2Options su2o;
    auto* s = app.add_subcommand("su2", "left-invariant operators on SU(2) and SO(3)");
    s->add_option("--op", su2o.op, "laplacian | sublaplacian | hgamma");
    s->add_option("--gamma", su2o.gamma, "gamma for hgamma (> 1)");
    s->add_option("--z-sign", su2o.z_sign, "sign convention for the iZ term: minus | plus");
    s->add_option("--alpha", su2o.alpha, "power");
    s->add_option("--p", su2o.p, "Schatten exponent");
    s->add_option("--group", su2o.group, "su2 | so3");
    s->add_option("--lmax", su2o.lmax, "largest ell summed");
    s->add_option("--mu1", su2o.mu1, "kernel regularity in x (sub-Laplacian orders)");
    s->add_option("--mu2", su2o.mu2, "kernel regularity in y");
    s->add_option("--c", su2o.c, "also test global hypoellipticity of H_1 + cI");

    WeylOptions weyl;
    auto* w = app.add_subcommand("weyl", "eigenvalue counting and the Weyl-type multiplicity bound");
    w->add_option("--model", weyl.model, "torus-laplacian | torus-bilaplacian");
    w->add_option("--n", weyl.n, "torus dimension (1 or 2)");
    w->add_option("--lambda", weyl.lambda, "count eigenvalues up to this value");

    CarlemanOptions carleman;
    auto* c = app.add_subcommand("carleman", "diagnostics for the Carleman-type continuous kernel");
    c->add_option("--log-shift", carleman.log_shift, "shift A in the coefficients")->check(CLI::NonNegativeNumber);
    c->add_option("--p", carleman.p, "Schatten exponent to classify");
    c->add_option("--n-small", carleman.n_small, "start of the growth fit");
    c->add_option("--n-large", carleman.n_large, "end of the growth fit");
    c->add_option("--sup-small", carleman.sup_small, "first partial sum for the sup norm");
    c->add_option("--sup-large", carleman.sup_large, "second partial sum for the sup norm");
    c->add_option("--grid", carleman.grid, "sup-norm grid size");

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        args = expand_config(std::move(args));
        std::reverse(args.begin(), args.end()); // CLI11 consumes from the back
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    } catch (const usage_error& e) {
        std::cerr << "schatlab: " << e.what() << "\n";
        return exit_usage;
    }

    try {
        CommandResult result;
        if (*a)
            result = run_analyze(analyze, common);
        else if (*t)
            result = run_trace(trace, common);
        else if (*pw)
            result = run_powers(powers, common);
        else if (*s)
            result = run_su2(su2o, common);
        else if (*w)
            result = run_weyl(weyl, common);
        else
            result = run_carleman(carleman, common);

        const std::string text = result.report.dump(2) + "\n";
        if (!csv_path.empty())
            write_atomic(csv_path, csv_text(result.plot));
        if (out_path.empty())
            std::cout << text << std::flush;
        else
            write_atomic(out_path, text);
        return exit_ok;
    } catch (const numerical_error& e) {
        std::cerr << "schatlab: numerical failure: " << e.what() << "\n";
        return exit_numerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "schatlab: " << e.what() << "\n";
        return exit_usage;
    } catch (const io_error& e) {
        std::cerr << "schatlab: " << e.what() << "\n";
        return exit_usage;
    }
}
