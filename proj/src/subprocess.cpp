#include "forge/subprocess.hpp"

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <filesystem>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

namespace forge {

namespace {

void set_cloexec(int fd) { fcntl(fd, F_SETFD, FD_CLOEXEC); }

}  // namespace

CommandResult run_command(const std::vector<std::string>& argv,
                          std::chrono::milliseconds timeout) {
  CommandResult result;
  if (argv.empty()) {
    result.spawn_failed = true;
    result.spawn_error = "empty argv";
    return result;
  }

  int out_pipe[2];
  int err_pipe[2];
  if (pipe(out_pipe) != 0 || pipe(err_pipe) != 0) {
    result.spawn_failed = true;
    result.spawn_error = std::strerror(errno);
    return result;
  }

  const pid_t pid = fork();
  if (pid < 0) {
    result.spawn_failed = true;
    result.spawn_error = std::strerror(errno);
    for (int fd : {out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]}) close(fd);
    return result;
  }

  if (pid == 0) {
    // Child: wire pipes, close stdin, exec.
    dup2(out_pipe[1], STDOUT_FILENO);
    dup2(err_pipe[1], STDERR_FILENO);
    for (int fd : {out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]}) close(fd);
    const int devnull = open("/dev/null", O_RDONLY);
    if (devnull >= 0) {
      dup2(devnull, STDIN_FILENO);
      close(devnull);
    }
    std::vector<char*> args;
    args.reserve(argv.size() + 1);
    for (const std::string& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    execvp(args[0], args.data());
    // Exec failed; 127 mirrors the shell convention.
    std::string msg = "exec failed: ";
    msg += std::strerror(errno);
    msg += '\n';
    (void)!write(STDERR_FILENO, msg.data(), msg.size());
    _exit(127);
  }

  close(out_pipe[1]);
  close(err_pipe[1]);
  set_cloexec(out_pipe[0]);
  set_cloexec(err_pipe[0]);

  const auto deadline = std::chrono::steady_clock::now() + timeout;
  bool out_open = true;
  bool err_open = true;
  char buffer[4096];
  while (out_open || err_open) {
    struct pollfd fds[2];
    nfds_t nfds = 0;
    int out_idx = -1;
    int err_idx = -1;
    if (out_open) {
      out_idx = static_cast<int>(nfds);
      fds[nfds++] = {out_pipe[0], POLLIN, 0};
    }
    if (err_open) {
      err_idx = static_cast<int>(nfds);
      fds[nfds++] = {err_pipe[0], POLLIN, 0};
    }
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      result.timed_out = true;
      kill(pid, SIGKILL);
      break;
    }
    const auto remaining =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now);
    const int rc = poll(fds, nfds, static_cast<int>(remaining.count()) + 1);
    if (rc < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (rc == 0) continue;  // re-check the deadline
    auto drain = [&](int idx, int fd, std::string& sink, bool& open_flag) {
      if (idx < 0 || (fds[idx].revents & (POLLIN | POLLHUP)) == 0) return;
      const ssize_t n = read(fd, buffer, sizeof buffer);
      if (n > 0) {
        sink.append(buffer, static_cast<std::size_t>(n));
      } else {
        open_flag = false;
      }
    };
    drain(out_idx, out_pipe[0], result.out, out_open);
    drain(err_idx, err_pipe[0], result.err, err_open);
  }
  close(out_pipe[0]);
  close(err_pipe[0]);

  int status = 0;
  while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.exit_code = 128 + WTERMSIG(status);
  }
  if (!result.timed_out && result.exit_code == 127 &&
      result.err.find("exec failed") != std::string::npos) {
    result.spawn_failed = true;
    result.spawn_error = result.err;
  }
  return result;
}

bool tool_exists(const std::string& tool) {
  if (tool.empty()) return false;
  if (tool.find('/') != std::string::npos) {
    std::error_code ec;
    return std::filesystem::exists(tool, ec) && !ec;
  }
  const char* path_env = std::getenv("PATH");
  if (path_env == nullptr) return false;
  std::string path(path_env);
  std::size_t start = 0;
  while (start <= path.size()) {
    std::size_t colon = path.find(':', start);
    if (colon == std::string::npos) colon = path.size();
    const std::string dir = path.substr(start, colon - start);
    if (!dir.empty()) {
      std::error_code ec;
      const auto candidate = std::filesystem::path(dir) / tool;
      if (std::filesystem::exists(candidate, ec) && !ec) return true;
    }
    start = colon + 1;
  }
  return false;
}

}  // namespace forge
