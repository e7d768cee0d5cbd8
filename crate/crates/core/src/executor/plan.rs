/// One barrier-separated phase of a time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    /// K1: ghost ring from the committed state.
    GhostFillCommitted,
    /// K2: predictor over every cell into the `U*` buffer.
    Predictor,
    /// K3: ghost ring from `U*`.
    GhostFillPredicted,
    /// K4: corrector into the `U^{n+1}` buffer, with smoothing fused in when enabled.
    Corrector,
    /// K5: stability guard over `U^{n+1}`.
    StabilityGuard,
    /// K6: wave-speed min-reduction giving the next `dt`.
    WaveSpeedReduction,
}

impl Kernel {
    pub fn name(self) -> &'static str {
        match self {
            Kernel::GhostFillCommitted => "ghost_fill_committed",
            Kernel::Predictor => "predictor",
            Kernel::GhostFillPredicted => "ghost_fill_predicted",
            Kernel::Corrector => "corrector",
            Kernel::StabilityGuard => "stability_guard",
            Kernel::WaveSpeedReduction => "wave_speed_reduction",
        }
    }

    /// Buffers a kernel reads, by the index of the kernel that produced them.
    /// `None` stands for the committed state of the previous step.
    fn reads(self) -> &'static [Option<usize>] {
        match self {
            Kernel::GhostFillCommitted => &[None],
            Kernel::Predictor => &[Some(0)],
            Kernel::GhostFillPredicted => &[Some(1)],
            Kernel::Corrector => &[Some(0), Some(2)],
            Kernel::StabilityGuard | Kernel::WaveSpeedReduction => &[Some(3)],
        }
    }
}

/// Ordered kernel sequence executed each step. Committing (buffer swap and
/// time advance) follows the last kernel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepPlan {
    kernels: Vec<Kernel>,
}

impl StepPlan {
    pub fn standard() -> Self {
        Self {
            kernels: vec![
                Kernel::GhostFillCommitted,
                Kernel::Predictor,
                Kernel::GhostFillPredicted,
                Kernel::Corrector,
                Kernel::StabilityGuard,
                Kernel::WaveSpeedReduction,
            ],
        }
    }

    pub fn kernels(&self) -> &[Kernel] {
        &self.kernels
    }

    /// Every kernel reads only buffers written by kernels strictly before it.
    pub fn is_well_ordered(&self) -> bool {
        let pos = |k: Kernel| self.kernels.iter().position(|&x| x == k);
        let standard = StepPlan::standard();
        self.kernels.iter().enumerate().all(|(at, k)| {
            k.reads().iter().all(|dep| match dep {
                None => true,
                Some(d) => pos(standard.kernels[*d]).is_some_and(|p| p < at),
            })
        })
    }
}

impl Default for StepPlan {
    fn default() -> Self {
        Self::standard()
    }
}
