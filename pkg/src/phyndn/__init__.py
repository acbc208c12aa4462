"""PHY-layer device identities for NDN-style IoT networks at the edge.

Builds maximum-entropy quantizers over IQ-imbalance composite parameters,
authenticates claimed identities with a two-step interval-plus-hypothesis-test
scheme, embeds identities in signed NDN packets, and splits packet-signing
work optimally between end and edge devices.
"""

__version__ = "0.1.0"

from .auth import (
    AuthDecision,
    Decision,
    PhyRecord,
    TestConfig,
    TestKind,
    TestResult,
    glrt_diff_rate,
    glrt_test,
    glrt_threshold,
    make_record,
    np_diff_rate,
    np_test,
    offsets,
    separate_records,
    two_step_authenticate,
)
from .iqi import (
    CompositeParamSpec,
    IqiProfile,
    Observation,
    ParamKind,
    PopulationBounds,
    composite_a,
    half_cosine_spec,
    observe,
    register_offline,
    sample_profiles,
    synthesize_received,
)
from .ndn import (
    InterestPacket,
    NdnName,
    NdnPacket,
    Node,
    decode,
    encode,
    generate_rsa_key,
    sign,
    verify,
    verify_chain,
)
from .offload import (
    CC2430,
    LAPTOP,
    RASPBERRY_PI3,
    DeviceProfile,
    InfeasibleError,
    OffloadPlan,
    calibrate_xi,
    measure_host_signing,
    optimize,
    time_saving,
)
from .pdfs import (
    ComponentPdf,
    PiecewisePdf,
    alpha_component_pdf,
    cos_theta_alpha_pdf,
    product_pdf,
    theta_component_pdf,
    uniform_pdf,
)
from .quantizer import (
    PhyId,
    QuantizerSpec,
    build_from_pdf,
    build_uniform,
    phy_id,
)
