from django.db import models
import uuid


class TimeStampedModel(models.Model):
    """Base model with created_at and updated_at fields"""
    created_at = models.DateTimeField(auto_now_add=True)
    updated_at = models.DateTimeField(auto_now=True)

    class Meta:
        abstract = True


class ExperimentRun(TimeStampedModel):
    """Track experiment run status, per-city failures and errors"""
    STATUS_CHOICES = [
        ('pending', 'Pending'),
        ('processing', 'Processing'),
        ('completed', 'Completed'),
        ('failed', 'Failed'),
        ('partial', 'Partial'),
    ]

    id = models.UUIDField(primary_key=True, default=uuid.uuid4, editable=False)
    disease = models.CharField(max_length=100)
    config_path = models.CharField(max_length=500, blank=True)
    seed = models.BigIntegerField()
    jobs = models.PositiveIntegerField(default=1)
    output_dir = models.CharField(max_length=500)
    status = models.CharField(max_length=15, choices=STATUS_CHOICES, default='pending')
    n_cities = models.PositiveIntegerField(default=0)
    n_reports = models.PositiveIntegerField(default=0)
    failed_cities = models.JSONField(default=list, blank=True)
    error_details = models.JSONField(null=True, blank=True)

    def __str__(self):
        return f"Run {self.id} - {self.disease} ({self.status})"

    class Meta:
        ordering = ['-created_at']
