fn main() {
    smc_sim::cli::main()
}
