#include <cucumber/cli.hpp>

int main(int argc, char** argv) {
    return cucumber::cli::run_cli(argc, argv);
}
