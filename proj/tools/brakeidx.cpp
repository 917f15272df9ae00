#include "brakeidx/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using brakeidx::cli::json;

json read_document(const std::string& file) {
    std::stringstream ss;
    if (file == "-") {
        ss << std::cin.rdbuf();
    } else {
        std::ifstream in(file);
        if (!in) throw std::runtime_error("cannot open " + file);
        ss << in.rdbuf();
    }
    return json::parse(ss.str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Brake-symmetric index toolkit"};
    app.require_subcommand(1);
    std::string config_file, out_file;
    app.add_option("--config", config_file, "JSON file of dotted config keys");
    app.add_option("--out", out_file, "write the report here instead of stdout");

    std::string input;
    for (const char* name : {"index", "spectral-flow", "vdim", "brake-orbit", "classify"}) {
        app.add_subcommand(name)->add_option("input", input, "input document (- for stdin)")->required();
    }
    double omega = 0.0;
    int rank = 1;
    std::string sign = "positive";
    bool slow = false;
    auto* cap = app.add_subcommand("cap-oracle", "count kernel and cokernel of a model cap");
    cap->add_option("--omega", omega)->required();
    cap->add_option("--rank", rank);
    cap->add_option("--sign", sign)->check(CLI::IsMember({"positive", "negative"}));
    cap->add_flag("--slow-oracle", slow, "cross-check by integrating each Fourier mode");
    app.add_subcommand("selfcheck", "run the built-in invariant suite");

    CLI11_PARSE(app, argc, argv);

    brakeidx::cli::Job job;
    job.command = app.get_subcommands().front()->get_name();
    try {
        if (!config_file.empty()) job.config_file = read_document(config_file);
        if (job.command == "cap-oracle") {
            job.input = {{"omega", omega}, {"rank", rank}, {"sign", sign}, {"slow_oracle", slow}};
        } else if (job.command != "selfcheck") {
            job.input = read_document(input);
        }
    } catch (const std::exception& e) {
        std::cerr << "brakeidx: " << e.what() << "\n";
        return brakeidx::cli::kValidation;
    }

    const auto outcome = brakeidx::cli::run(job);
    const std::string text = brakeidx::cli::render(outcome.report);
    if (out_file.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_file);
        out << text;
        if (!out) {
            std::cerr << "brakeidx: cannot write " << out_file << "\n";
            return brakeidx::cli::kValidation;
        }
    }
    return outcome.exit_code;
}
