from fastapi import APIRouter
from app.api.v1.endpoints import scenarios, simulations, sweeps, analysis

api_router = APIRouter()

api_router.include_router(scenarios.router, prefix="/scenarios", tags=["Scenarios"])
api_router.include_router(simulations.router, prefix="/simulations", tags=["Simulations"])
api_router.include_router(sweeps.router, prefix="/sweeps", tags=["Sweeps"])
api_router.include_router(analysis.router, prefix="/analysis", tags=["Analysis"])
