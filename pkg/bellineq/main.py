import logging
import os

from dotenv import load_dotenv
from fastapi import FastAPI, Request, status
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import models
from .database import engine
from .exceptions import (
    BellError,
    InvalidArgument,
    NonMonotonicError,
    NoViolationError,
    NumericalDriftError,
    RunNotFound,
)
from .routers import detection, lhv, optimize, polynomial, quantum, runs

load_dotenv()

logger = logging.getLogger(__name__)

ENVIRONMENT = os.getenv("ENVIRONMENT", "development")
IS_PRODUCTION = ENVIRONMENT == "production"

FRONTEND_URL = os.getenv("FRONTEND_URL")
FRONTEND_LOCAL_URL = os.getenv("FRONTEND_LOCAL_URL")

origins = []
if FRONTEND_URL:
    origins.append(FRONTEND_URL)
if FRONTEND_LOCAL_URL:
    origins.append(FRONTEND_LOCAL_URL)

models.Base.metadata.create_all(bind=engine)

app = FastAPI(title="bellineq")

app.add_middleware(
    CORSMiddleware,
    allow_origins=origins,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

_STATUS = {
    InvalidArgument: status.HTTP_422_UNPROCESSABLE_ENTITY,
    RunNotFound: status.HTTP_404_NOT_FOUND,
    NoViolationError: status.HTTP_409_CONFLICT,
    NonMonotonicError: status.HTTP_409_CONFLICT,
    NumericalDriftError: status.HTTP_500_INTERNAL_SERVER_ERROR,
}


@app.exception_handler(BellError)
async def bell_error_handler(request: Request, exc: BellError):
    code = _STATUS.get(type(exc), status.HTTP_400_BAD_REQUEST)
    if code >= 500:
        logger.error("%s on %s: %s", type(exc).__name__, request.url.path, exc)
    return JSONResponse(status_code=code, content={"detail": str(exc), "error": type(exc).__name__})


app.include_router(polynomial.router)
app.include_router(lhv.router)
app.include_router(quantum.router)
app.include_router(optimize.router)
app.include_router(detection.router)
app.include_router(runs.router)


@app.get("/ping")
def ping():
    return {"message": "pong"}
