// resgrad: command-line driver for the reservoir-variable integrators.
//
//   resgrad simulate --integrator moddg:q3 --t-end 50 --out traj.csv
//   resgrad order --integrator moddg:q3 --out order.csv
//   resgrad compare --integrator moddg,pqplf,erk4 --t-end 50 --out compare.csv

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "resgrad/cli/config.hpp"
#include "resgrad/cli/run.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        const auto cfg = resgrad::cli::parse_config(args);
        const auto result = resgrad::cli::run(cfg);
        for (const auto& doc : result.documents) {
            if (doc.path.empty()) {
                std::cout << doc.body;
                continue;
            }
            std::ofstream file(doc.path, std::ios::binary);
            if (!file) {
                std::cerr << "resgrad: cannot write '" << doc.path << "'\n";
                return 1;
            }
            file << doc.body;
        }
        std::cerr << result.summary;
        return 0;
    } catch (const resgrad::cli::HelpRequested& help) {
        std::cout << help.what();
        return 0;
    } catch (const resgrad::ConfigError& e) {
        std::cerr << "resgrad: " << e.what() << "\n";
        return 2;
    } catch (const resgrad::Error& e) {
        std::cerr << "resgrad: error: " << e.what() << "\n";
        return 1;
    }
}
