"""
Main FastAPI application for the radial Euler-Poisson toolkit
"""
import os
import logging
import tempfile
from typing import List, Optional

import numpy as np
from fastapi import FastAPI, File, Form, HTTPException, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from src import __version__
from src.errors import DomainError, InconsistentDataError, RadialEPError
from src.initial_data.classifier import ConditionChecker, ConditionReport
from src.initial_data.initial_data import InitialData
from src.period.period_analysis import PeriodAnalyzer
from src.potential.radial_potential import EffectivePotential, NormalizedPotential, PotentialSpec
from src.utils.config_utils import load_config, setup_logging

# Load configuration
config = load_config()
setup_logging(config)
logger = logging.getLogger(__name__)

# Initialize analysis components
period_analyzer = PeriodAnalyzer(config.get('period', {}))
condition_checker = ConditionChecker(config.get('classification', {}), period_analyzer, config.get('dynamics', {}))

# API configuration
api_config = config.get('api', {})
MAX_SAMPLES = api_config.get('max_samples', 2000)

# Initialize FastAPI app
app = FastAPI(
    title="Radial Euler-Poisson Toolkit API",
    description="""
    Period analysis and initial-data classification for the radial pressureless
    Euler-Poisson system with quadratic confinement.

    ## Features

    * **Period tables**: T(E) of the effective potential mN(r) + r^2/2 above its minimum
    * **Period derivative**: T'(E) from the regular H-function representation
    * **Data check**: classify a profile (r, P0, u0) as globally smooth or blowing up
    """,
    version=__version__,
    docs_url="/docs",
    redoc_url="/redoc"
)

# Add CORS middleware
app.add_middleware(
    CORSMiddleware,
    allow_origins=api_config.get('cors_origins', ["*"]),
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


# Pydantic Models for API Documentation
class HealthResponse(BaseModel):
    status: str = Field(..., example="healthy", description="Service status")
    service: str = Field(..., example="Radial Euler-Poisson Toolkit", description="Service name")
    version: str = Field(..., example="1.0.0", description="API version")


class PeriodTableRequest(BaseModel):
    d: int = Field(3, ge=2, description="Spatial dimension")
    m: float = Field(1.0, gt=0, description="Enclosed mass")
    offset_min: float = Field(1e-4, gt=0, description="Smallest E - e_min")
    offset_max: float = Field(1e2, gt=0, description="Largest E - e_min")
    samples: int = Field(50, ge=2, description="Number of log-spaced energies")
    normalized: bool = Field(False, description="Use the normalized potential V_d (m ignored)")


class PeriodPoint(BaseModel):
    E: float = Field(..., description="Energy level")
    T: float = Field(..., description="Period of the orbit at this level")


class PeriodTableResponse(BaseModel):
    success: bool = Field(..., example=True)
    d: int
    e_min: float = Field(..., description="Minimum of the potential")
    tau: float = Field(..., description="Small-oscillation period 2 pi / sqrt(d)")
    points: List[PeriodPoint]


class PeriodDerivativeRequest(BaseModel):
    d: int = Field(3, ge=2, description="Spatial dimension")
    m: float = Field(1.0, gt=0, description="Enclosed mass")
    offset: float = Field(..., ge=0, description="E - e_min")


class PeriodDerivativeResponse(BaseModel):
    success: bool = Field(..., example=True)
    E: float
    T: float = Field(..., description="Period T(E)")
    T_prime: float = Field(..., description="dT/dE from the H-function integral")
    limit_at_minimum: float = Field(..., description="pi c_V / V''(r*)^(7/2)")


class DataCheckResponse(BaseModel):
    success: bool = Field(..., example=True)
    exit_status: int = Field(..., description="0 global/stationary, 2 blow-up or not global, 1 invalid")
    report: ConditionReport


def _potential(d: int, m: float, normalized: bool = False):
    if normalized:
        return NormalizedPotential(d)
    return EffectivePotential(PotentialSpec(d=d, m=m))


@app.get("/health", response_model=HealthResponse, tags=["Health"])
async def health_check():
    """
    Health Check Endpoint

    Returns the health status of the API service.
    """
    return HealthResponse(
        status="healthy",
        service="Radial Euler-Poisson Toolkit",
        version=__version__
    )


@app.post("/api/period/table", response_model=PeriodTableResponse, tags=["Period"])
def period_table(request: PeriodTableRequest):
    """
    Period Table API

    Tabulates T(E) on a log-spaced grid of E - e_min in [offset_min, offset_max].
    """
    try:
        if request.samples > MAX_SAMPLES:
            raise HTTPException(status_code=400, detail=f"At most {MAX_SAMPLES} samples per request")
        if request.offset_min >= request.offset_max:
            raise HTTPException(status_code=400, detail="offset_min must be below offset_max")

        pot = _potential(request.d, request.m, request.normalized)
        offsets = np.geomspace(request.offset_min, request.offset_max, request.samples)
        table = period_analyzer.period_table(pot.e_min + offsets, pot, label=f"d{request.d}")
        points = [PeriodPoint(E=float(E), T=float(T)) for E, T in zip(table.E, table.T)]
        return PeriodTableResponse(success=True, d=request.d, e_min=pot.e_min, tau=pot.tau, points=points)

    except HTTPException:
        raise
    except DomainError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"Period table error: {e}", exc_info=True)
        raise HTTPException(status_code=500, detail=str(e))


@app.post("/api/period/derivative", response_model=PeriodDerivativeResponse, tags=["Period"])
def period_derivative(request: PeriodDerivativeRequest):
    """
    Period Derivative API

    Returns T(E) and T'(E) at E = e_min + offset. At offset 0 the period is
    tau_d and the derivative is its limit at the minimum.
    """
    try:
        pot = _potential(request.d, request.m)
        E = pot.e_min + request.offset
        return PeriodDerivativeResponse(
            success=True,
            E=E,
            T=period_analyzer.period(E, pot),
            T_prime=period_analyzer.period_derivative(E, pot),
            limit_at_minimum=period_analyzer.period_derivative_limit(pot)
        )

    except DomainError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"Period derivative error: {e}", exc_info=True)
        raise HTTPException(status_code=500, detail=str(e))


@app.post("/api/data/check", response_model=DataCheckResponse, tags=["Initial data"])
async def check_data(
    file: UploadFile = File(..., description="Profile CSV with header r,P0,u0"),
    dim: int = Form(..., description="Spatial dimension d")
):
    """
    Initial Data Check API

    Classifies an uploaded profile by the global-existence conditions and
    returns the full condition report.
    """
    temp_path: Optional[str] = None
    try:
        if not file.filename:
            raise HTTPException(status_code=400, detail="No file selected")
        if dim < 2:
            raise HTTPException(status_code=400, detail=f"Dimension must be at least 2, got {dim}")

        contents = await file.read()
        with tempfile.NamedTemporaryFile(delete=False, suffix='.csv') as tmp_file:
            tmp_file.write(contents)
            temp_path = tmp_file.name

        try:
            data = InitialData.from_csv(temp_path, dim)
        except (InconsistentDataError, RadialEPError) as e:
            raise HTTPException(status_code=400, detail=f"Invalid profile: {e}")

        report = condition_checker.classify(data)
        logger.info(f"Classified {file.filename}: {report.verdict.value}")
        return DataCheckResponse(success=True, exit_status=report.exit_status, report=report)

    except HTTPException:
        raise
    except Exception as e:
        logger.error(f"Data check error: {e}", exc_info=True)
        raise HTTPException(status_code=500, detail=str(e))
    finally:
        if temp_path and os.path.exists(temp_path):
            os.unlink(temp_path)


if __name__ == '__main__':
    import uvicorn

    host = api_config.get('host', '0.0.0.0')
    port = api_config.get('port', 8000)
    debug = api_config.get('debug', False)

    logger.info(f"Starting Radial Euler-Poisson Toolkit API on {host}:{port}")
    logger.info(f"API Documentation available at http://{host}:{port}/docs")

    uvicorn.run(
        "app:app",
        host=host,
        port=port,
        reload=debug,
        log_level="info"
    )
