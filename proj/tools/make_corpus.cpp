// Generates labelled texture batches in the 3073-byte binary record layout,
// for experiments without an external dataset.
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "scatnet/errors.hpp"
#include "scatnet/synth.hpp"

int main(int argc, char** argv) {
    CLI::App app{"procedural texture corpus generator"};
    std::string out = "corpus.bin";
    int count = 1000;
    std::uint64_t seed = 1;
    app.add_option("--out", out, "output batch file");
    app.add_option("--count", count, "number of records")->check(CLI::NonNegativeNumber);
    app.add_option("--seed", seed, "generator seed");

    try {
        app.parse(argc, argv);
        scatnet::write_synth_cifar_batch(out, count, seed);
        std::printf("wrote %d records to %s\n", count, out.c_str());
        return 0;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const scatnet::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return scatnet::Error::exit_code(e.kind());
    }
}
