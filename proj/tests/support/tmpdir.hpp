#pragma once
// Per-test scratch directories, removed on destruction.

#include <filesystem>
#include <fstream>
#include <string>

namespace rpe::testing {

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        base_ = std::filesystem::temp_directory_path() /
                ("rpe_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
        std::filesystem::create_directories(base_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(base_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string path(const std::string& name) const { return (base_ / name).string(); }
    std::string str() const { return base_.string(); }

    std::string write_file(const std::string& name, const std::string& content) const {
        const std::string p = path(name);
        std::ofstream out(p);
        out << content;
        return p;
    }

private:
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::filesystem::path base_;
};

}  // namespace rpe::testing
