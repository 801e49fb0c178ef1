#pragma once

#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <string>

#include "cgm/error.hpp"
#include "cgm/scenario.hpp"

namespace cgm::test {

#define EXPECT_CGM_ERROR(stmt, expected_code)                                       \
    do {                                                                            \
        try {                                                                       \
            stmt;                                                                   \
            ADD_FAILURE() << "expected error " << ::cgm::to_string(expected_code); \
        } catch (const ::cgm::Error& e) {                                           \
            EXPECT_EQ(e.code(), expected_code) << e.what();                         \
        }                                                                           \
    } while (0)

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        std::string name = "cgm_" + tag;
        if (info) name += std::string("_") + info->test_suite_name() + "_" + info->name();
        path_ = std::filesystem::temp_directory_path() / name;
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

/// Small scene used across tests: 60 x 50 m, BS near one corner, three buildings.
inline EnvironmentSpec small_spec(std::uint64_t seed = 11) {
    EnvironmentSpec s;
    s.width = 60;
    s.height = 50;
    s.bs_position = {8.0, 42.0, 20.0};
    s.buildings = {{20, 10, 30, 22, 12}, {38, 30, 50, 40, 18}, {10, 20, 16, 28, 9}};
    s.seed = seed;
    return s;
}

}  // namespace cgm::test
