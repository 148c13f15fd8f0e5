#include "gepa/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>

#include "gepa/error.hpp"

namespace gepa {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

CommandResult run_command(const std::vector<std::string>& argv, double timeout_s,
                          const std::string& workdir, std::size_t output_cap) {
  if (argv.empty()) raise(ErrorKind::invalid_argument, "run_command with empty argv");

  int out_pipe[2];
  int err_pipe[2];  // exec-failure reporting, CLOEXEC
  if (pipe(out_pipe) != 0) raise(ErrorKind::io, std::string("pipe: ") + std::strerror(errno));
  if (pipe(err_pipe) != 0) {
    close(out_pipe[0]);
    close(out_pipe[1]);
    raise(ErrorKind::io, std::string("pipe: ") + std::strerror(errno));
  }
  fcntl(err_pipe[1], F_SETFD, FD_CLOEXEC);

  const auto start = std::chrono::steady_clock::now();
  const pid_t pid = fork();
  if (pid < 0) {
    for (int fd : {out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]}) close(fd);
    CommandResult r;
    r.spawn_failed = true;
    r.spawn_error = std::string("fork: ") + std::strerror(errno);
    return r;
  }

  if (pid == 0) {
    setpgid(0, 0);
    close(out_pipe[0]);
    close(err_pipe[0]);
    dup2(out_pipe[1], STDOUT_FILENO);
    dup2(out_pipe[1], STDERR_FILENO);
    close(out_pipe[1]);
    if (!workdir.empty() && chdir(workdir.c_str()) != 0) {
      const int e = errno;
      (void)!write(err_pipe[1], &e, sizeof(e));
      _exit(127);
    }
    std::vector<char*> args;
    args.reserve(argv.size() + 1);
    for (const std::string& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    execvp(args[0], args.data());
    const int e = errno;
    (void)!write(err_pipe[1], &e, sizeof(e));
    _exit(127);
  }

  setpgid(pid, pid);  // also done in the child; whichever runs first wins
  close(out_pipe[1]);
  close(err_pipe[1]);

  CommandResult result;
  char buf[4096];
  bool killed = false;
  for (;;) {
    const double remaining = timeout_s - seconds_since(start);
    if (remaining <= 0 && !killed) {
      if (kill(-pid, SIGKILL) != 0) kill(pid, SIGKILL);
      killed = true;
    }
    pollfd pfd{out_pipe[0], POLLIN, 0};
    const double wait_ms = killed ? 1000.0 : std::min(remaining * 1000.0 + 1.0, 60000.0);
    const int rc = poll(&pfd, 1, static_cast<int>(wait_ms));
    if (rc > 0) {
      const ssize_t n = read(out_pipe[0], buf, sizeof(buf));
      if (n <= 0) break;  // EOF or error: child closed its end
      const std::size_t keep = result.output.size() < output_cap
                                   ? std::min(static_cast<std::size_t>(n), output_cap - result.output.size())
                                   : 0;
      result.output.append(buf, keep);
    } else if (rc == 0 && killed) {
      break;  // group is dead; stop draining even if a stray fd stayed open
    }
    // rc == 0 before the kill: poll deadline; loop re-checks the wall clock.
  }
  close(out_pipe[0]);

  int status = 0;
  waitpid(pid, &status, 0);
  result.duration_s = seconds_since(start);
  result.timed_out = killed;

  int exec_errno = 0;
  if (read(err_pipe[0], &exec_errno, sizeof(exec_errno)) == sizeof(exec_errno)) {
    result.spawn_failed = true;
    result.spawn_error = std::string(argv[0]) + ": " + std::strerror(exec_errno);
  }
  close(err_pipe[0]);

  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.exit_code = 128 + WTERMSIG(status);
  }
  return result;
}

}  // namespace gepa
