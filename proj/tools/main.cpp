#include <boltrack/cli.hpp>

int main(int argc, char** argv) {
    return boltrack::cli::run(argc, argv);
}
