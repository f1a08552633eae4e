use jxeskit_core::bench::TrackingAllocator;

#[global_allocator]
static ALLOC: TrackingAllocator = TrackingAllocator;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("JXESKIT_LOG", "warn")).init();
    std::process::exit(jxeskit_core::cli::run(std::env::args_os()));
}
