#include <cstdio>
#include <exception>

#include "cli.hpp"
#include "microdepth/errors.hpp"

int main(int argc, char** argv) {
    try {
        return microdepth_cli::run(argc, argv);
    } catch (const microdepth::invalid_input& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const microdepth::degenerate_input& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const microdepth::io_error& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const microdepth::invalid_dataset& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 3;
    }
}
