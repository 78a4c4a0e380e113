// Writes a small synthetic dataset for the CLI smoke test.

#include <cstdio>

#include "fixtures.hpp"

int main(int argc, char** argv)
{
    if (argc != 2) {
        std::fprintf(stderr, "usage: make_fixture <dataset-root>\n");
        return 2;
    }
    const std::filesystem::path root = argv[1];
    std::filesystem::remove_all(root);
    std::filesystem::create_directories(root);
    fixtures::SyntheticScene few;
    few.frames = 4;
    few.icosphere_subdivisions = 3;
    fixtures::write_synthetic_scene(root, few);
    fixtures::SyntheticScene one = few;
    one.scene_id = 2;
    one.frames = 1;
    one.ground_truth = false;
    fixtures::write_synthetic_scene(root, one);
    return 0;
}
